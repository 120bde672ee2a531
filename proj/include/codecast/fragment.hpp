#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "codecast/bytes.hpp"
#include "codecast/hash.hpp"

namespace codecast {

// Variable-size transactions ride the fixed-size broadcast layer as chains
// of fragments.  Each fragment carries the hash of its predecessor, so a
// receiver can stitch a chain back together from the LAST fragment without
// any per-transaction identifier.
//
// Fragment layout (exactly fragment_size bytes on the wire):
//   flags     1 byte   bit 0 = FIRST, bit 1 = LAST
//   prev_hash 32 bytes SHA-256 of the previous fragment (zero for FIRST)
//   data_len  2 bytes  big-endian payload length
//   data      fragment_size - 35 bytes, zero padded past data_len

constexpr uint8_t kFragmentFirst = 0x01;
constexpr uint8_t kFragmentLast = 0x02;
constexpr size_t kFragmentHeaderSize = 35;

struct Fragment {
    uint8_t flags = 0;
    Digest prev_hash{};
    Bytes data;  // unpadded payload (data_len bytes)

    bool first() const { return flags & kFragmentFirst; }
    bool last() const { return flags & kFragmentLast; }
};

// Splits a transaction into ceil(|tx| / (fragment_size - 35)) chained
// fragments.  Throws std::runtime_error if fragment_size < 36, the payload
// is empty, or it exceeds what data_len can express per fragment.
std::vector<Fragment> fragment_transaction(const Bytes& tx, size_t fragment_size);

Bytes serialize_fragment(const Fragment& f, size_t fragment_size);
Fragment deserialize_fragment(const Bytes& wire);

// Buffer of received fragments keyed by their own hash, with FIFO eviction
// once `capacity` fragments are stored.  Completed chains stay in the store
// until evicted by capacity: eagerly deleting a chain would let an attacker
// who appends a fake LAST fragment onto an honest prefix consume the honest
// fragments before the real suffix arrives.
class FragmentStore {
public:
    explicit FragmentStore(size_t capacity = 1000000);

    // Inserts the fragment and walks every chain that might now be complete.
    // Returns the payload bytes of each chain completed by this insertion
    // (empty for most inserts; more than one entry only under adversarial
    // chain sharing).
    std::vector<Bytes> insert(const Fragment& f, size_t fragment_size);

    size_t size() const { return by_hash_.size(); }
    bool contains(const Digest& h) const { return by_hash_.count(h) != 0; }

private:
    struct Walk {
        Digest last_hash{};  // the LAST fragment this walk completes
    };

    // Attempts to walk a chain ending at `last_hash` back to its FIRST
    // fragment.  On success appends the assembled payload to `out`; if a
    // predecessor is missing, parks the walk until that hash arrives.
    void try_complete(const Digest& last_hash, std::vector<Bytes>& out);

    size_t capacity_;
    std::unordered_map<Digest, Fragment, DigestHash> by_hash_;
    std::deque<Digest> arrival_order_;
    // Missing predecessor hash -> LAST-fragment hashes blocked on it.
    std::unordered_map<Digest, std::vector<Digest>, DigestHash> blocked_on_;
};

// Size histogram: transaction size in bytes -> relative frequency.
using SizeHistogram = std::map<size_t, double>;

// Expected bytes on the wire per transaction byte if every transaction in
// the histogram is cut into fragment_size-byte fragments.
double fragmentation_overhead(const SizeHistogram& hist, size_t fragment_size);

// Exhaustive search for the fragment size minimizing the overhead over
// [lo, hi]; ties go to the smaller size.  Throws std::runtime_error on an
// empty histogram or lo < 36.
size_t optimal_fragment_size(const SizeHistogram& hist, size_t lo, size_t hi);

}  // namespace codecast
