#include "codecast/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace codecast {

Digest sha256(const uint8_t* data, size_t len) {
    Digest out;
    unsigned int out_len = 0;
    if (!EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) || out_len != 32)
        throw std::runtime_error("sha256: EVP_Digest failed");
    return out;
}

namespace {

inline uint64_t rotl64(uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

inline uint64_t le64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; i--) v = (v << 8) | p[i];
    return v;
}

inline void sipround(uint64_t& v0, uint64_t& v1, uint64_t& v2, uint64_t& v3) {
    v0 += v1;
    v1 = rotl64(v1, 13);
    v1 ^= v0;
    v0 = rotl64(v0, 32);
    v2 += v3;
    v3 = rotl64(v3, 16);
    v3 ^= v2;
    v0 += v3;
    v3 = rotl64(v3, 21);
    v3 ^= v0;
    v2 += v1;
    v1 = rotl64(v1, 17);
    v1 ^= v2;
    v2 = rotl64(v2, 32);
}

}  // namespace

uint64_t siphash24(const HashKey& key, const uint8_t* data, size_t len) {
    uint64_t k0 = le64(key.data());
    uint64_t k1 = le64(key.data() + 8);
    uint64_t v0 = 0x736f6d6570736575ULL ^ k0;
    uint64_t v1 = 0x646f72616e646f6dULL ^ k1;
    uint64_t v2 = 0x6c7967656e657261ULL ^ k0;
    uint64_t v3 = 0x7465646279746573ULL ^ k1;

    const uint8_t* end = data + (len & ~size_t{7});
    for (const uint8_t* p = data; p != end; p += 8) {
        uint64_t m = le64(p);
        v3 ^= m;
        sipround(v0, v1, v2, v3);
        sipround(v0, v1, v2, v3);
        v0 ^= m;
    }

    uint64_t last = static_cast<uint64_t>(len) << 56;
    for (size_t i = 0; i < (len & 7); i++)
        last |= static_cast<uint64_t>(end[i]) << (8 * i);
    v3 ^= last;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    v0 ^= last;

    v2 ^= 0xff;
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    sipround(v0, v1, v2, v3);
    return v0 ^ v1 ^ v2 ^ v3;
}

}  // namespace codecast
