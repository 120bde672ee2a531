#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "codecast/bytes.hpp"

namespace codecast {

// All randomness in the project flows through this wrapper around
// mt19937_64.  The distribution transforms are written out by hand instead
// of using <random> distributions because the standard leaves those
// implementation-defined; with fixed transforms, a seed produces the same
// stream on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform double in [0, hi).
    double uniform(double hi) { return uniform() * hi; }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

    // Box-Muller; one value per call (the pair's twin is discarded to keep
    // the consumption pattern simple and deterministic).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

    Bytes random_bytes(size_t n) {
        Bytes out(n);
        size_t i = 0;
        while (i + 8 <= n) {
            uint64_t v = gen_();
            for (int j = 0; j < 8; j++) out[i++] = static_cast<uint8_t>(v >> (8 * j));
        }
        if (i < n) {
            uint64_t v = gen_();
            while (i < n) {
                out[i++] = static_cast<uint8_t>(v);
                v >>= 8;
            }
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64: used to derive independent substream seeds from a master seed
// plus a stream label, so simulator components cannot perturb each other's
// randomness.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t x = splitmix64(master ^ 0x243f6a8885a308d3ULL);
    x = splitmix64(x ^ a);
    x = splitmix64(x ^ b);
    x = splitmix64(x ^ c);
    return x;
}

}  // namespace codecast
