#pragma once

#include <array>
#include <cstdint>
#include <cstring>

#include "codecast/bytes.hpp"

namespace codecast {

// Full-content digest used for window dedup, the transaction registry, and
// the fragment chain pointers.  Backed by SHA-256 (OpenSSL libcrypto).
using Digest = std::array<uint8_t, 32>;

Digest sha256(const uint8_t* data, size_t len);
inline Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

struct DigestHash {
    size_t operator()(const Digest& d) const {
        uint64_t v;
        std::memcpy(&v, d.data(), 8);
        return static_cast<size_t>(v);
    }
};

// 128-bit key for the per-link keyed short-ID function.
using HashKey = std::array<uint8_t, 16>;

// SipHash-2-4 with 64-bit output: the concrete keyed PRF behind transaction
// short IDs.  Deterministic, fast on short inputs, and keyed so that peers
// cannot predict each other's IDs.
uint64_t siphash24(const HashKey& key, const uint8_t* data, size_t len);
inline uint64_t siphash24(const HashKey& key, const Bytes& b) {
    return siphash24(key, b.data(), b.size());
}

}  // namespace codecast
