#pragma once

#include <cstdint>
#include <deque>
#include <unordered_set>
#include <vector>

#include "codecast/bytes.hpp"
#include "codecast/hash.hpp"
#include "codecast/rng.hpp"

namespace codecast {

// A transaction as seen by the broadcast layer: an opaque fixed-size payload
// plus the creation timestamp used for latency measurement.
struct Transaction {
    BytesPtr data;
    double created_at = 0.0;
};

// Degree distribution for codeword generation.  Built by robust_soliton()
// and sampled by inverse CDF so that a seeded generator yields the same
// degree sequence everywhere.
class DegreeDistribution {
public:
    DegreeDistribution() = default;
    DegreeDistribution(std::vector<double> pmf);  // pmf[i] = P(degree = i + 1)

    // Robust soliton over degrees 1..k with failure parameter delta and
    // spike constant c, truncated to max_degree and renormalized.
    static DegreeDistribution robust_soliton(uint32_t k, double c, double delta,
                                             uint32_t max_degree);

    uint32_t sample(Rng& rng) const;

    const std::vector<double>& pmf() const { return pmf_; }
    uint32_t max_degree() const { return static_cast<uint32_t>(pmf_.size()); }

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

// FIFO coding window holding the k most recently observed transactions.
// A membership set over full-content digests suppresses duplicates, so a
// transaction decoded via several neighbors enters the window once.
class CodingWindow {
public:
    explicit CodingWindow(uint32_t k);

    // Returns false (and changes nothing) if the digest was seen before.
    bool insert(const Transaction& tx);
    bool insert(const Transaction& tx, const Digest& digest);

    // Marks a digest as seen without storing the transaction (used by
    // censoring nodes so a suppressed transaction is not reconsidered).
    bool remember(const Digest& digest) { return seen_.insert(digest).second; }

    bool seen(const Digest& d) const { return seen_.count(d) != 0; }
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    uint32_t capacity() const { return k_; }
    const std::deque<Transaction>& entries() const { return entries_; }

private:
    uint32_t k_;
    std::deque<Transaction> entries_;
    std::unordered_set<Digest, DigestHash> seen_;
};

// One codeword: the XOR of `degree` window transactions together with their
// keyed short IDs in window order (oldest first).
struct Codeword {
    uint64_t seqno = 0;
    std::vector<uint64_t> ids;  // values of the h-byte short IDs
    Bytes payload;              // XOR of the sampled transaction payloads
};

// Short ID of a payload under a link key: SipHash-2-4 truncated to the low
// id_bytes bytes.
inline uint64_t short_id(const HashKey& key, const Bytes& payload, uint32_t id_bytes) {
    uint64_t mask = id_bytes >= 8 ? ~uint64_t{0} : (uint64_t{1} << (8 * id_bytes)) - 1;
    return siphash24(key, payload) & mask;
}

// Samples a degree, clamps it to the window population, picks that many
// distinct window entries uniformly, and XORs them into a codeword whose IDs
// are keyed for the given link.  Throws std::runtime_error on an empty
// window; all window payloads must share one size.
Codeword encode(const CodingWindow& window, const DegreeDistribution& dist, Rng& rng,
                const HashKey& link_key, uint32_t id_bytes, uint64_t seqno);

// Wire format: seqno (8 bytes BE) | degree (2 bytes BE) | degree * id_bytes
// bytes of IDs | payload.
Bytes serialize_codeword(const Codeword& cw, uint32_t id_bytes);

// Parses a codeword of the given ID width and payload size; throws
// std::runtime_error if the buffer is malformed (bad length, degree 0).
Codeword deserialize_codeword(const Bytes& wire, uint32_t id_bytes, uint32_t payload_size);

inline size_t codeword_wire_size(uint32_t degree, uint32_t id_bytes, uint32_t payload_size) {
    return 8 + 2 + static_cast<size_t>(degree) * id_bytes + payload_size;
}

}  // namespace codecast
