#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "codecast/codec.hpp"

namespace codecast {

// A codeword that was still undecoded `timeout` seconds after arrival on
// `link`.  Reported exactly once; decoding the codeword later does not
// retract the event.
struct LossEvent {
    uint32_t link = 0;
    uint64_t seqno = 0;
    double reported_at = 0.0;
};

struct DecoderConfig {
    uint32_t id_bytes = 4;           // h: short-ID width in bytes
    uint32_t payload_size = 128;     // t: transaction payload size
    uint32_t peel_window = 100000;   // m: decoded transactions indexed per link
    double timeout = 0.0005;         // tau: decode deadline in seconds
    uint32_t pending_cap = 500;      // max pending codewords per link (10k by default)
    bool keep_decoded_log = true;    // disable in long simulations to bound memory
};

// Joint peeling decoder over any number of incoming links.  Each link has
// its own 16-byte key; every decoded transaction is immediately re-hashed
// under every link's key so codewords from different neighbors peel each
// other.  Degree-1 payloads are accepted only if their keyed short ID
// matches the remaining header ID, which catches mis-peels caused by short
// ID collisions.
class DecoderState {
public:
    explicit DecoderState(DecoderConfig cfg);

    // Registers an incoming link and returns its index.
    uint32_t add_link(const HashKey& key);

    // Processes one codeword received on `link` at time `now`.  Returns the
    // transactions newly decoded by this codeword, in decode order.
    std::vector<BytesPtr> ingest(uint32_t link, const Codeword& cw, double now);

    // Reports pending codewords that have outlived the timeout.  Call
    // periodically (the protocol layer ticks every timeout/2).
    std::vector<LossEvent> scan_timeouts(double now);

    const DecoderConfig& config() const { return cfg_; }
    size_t link_count() const { return links_.size(); }
    size_t pending_count(uint32_t link) const;
    size_t id_index_size(uint32_t link) const { return links_.at(link).id_index.size(); }
    const std::vector<BytesPtr>& decoded_log() const { return decoded_log_; }

    // Storage hook: lets an embedder deduplicate identical decoded payloads
    // across many decoder instances.  Defaults to a plain allocation.
    std::function<BytesPtr(Bytes&&)> intern;

    // Diagnostic counters.
    uint64_t ingested = 0;       // codewords handed to ingest()
    uint64_t corrupted = 0;      // degree-1 validation failures
    uint64_t duplicate_id_drops = 0;
    uint64_t malformed = 0;      // wrong payload size or empty ID list
    uint64_t fully_covered = 0;  // peeled to degree 0 on arrival (no new info)

private:
    struct Pending {
        uint32_t link = 0;
        uint64_t seqno = 0;
        Bytes payload;
        std::vector<uint64_t> unresolved;
        bool loss_reported = false;
    };

    struct Link {
        HashKey key;
        // Unresolved short ID -> handles of pending codewords waiting on it.
        std::unordered_multimap<uint64_t, uint64_t> edges;
        // Short ID -> most recently decoded transaction with that ID.
        std::unordered_map<uint64_t, BytesPtr> id_index;
        // Insertion order for the peel-window eviction (oldest first).
        std::deque<std::pair<uint64_t, BytesPtr>> id_order;
        // Pending codewords in arrival order for the cap eviction.
        std::deque<uint64_t> pending_order;
        size_t pending_live = 0;
    };

    void index_decoded(Link& link, uint64_t id, const BytesPtr& tx);
    void drop_pending(uint64_t handle, Pending& pc);
    void process_decoded(BytesPtr tx, std::vector<BytesPtr>& out);
    void drain_queues(std::vector<BytesPtr>& out);
    // Validates a degree-1 pending codeword; on success queues its payload
    // as a decoded transaction.
    void finalize_degree1(uint64_t handle);

    DecoderConfig cfg_;
    std::vector<Link> links_;
    std::unordered_map<uint64_t, Pending> pending_;
    std::deque<std::pair<double, uint64_t>> timeout_queue_;  // (arrived_at, handle)
    std::vector<BytesPtr> decoded_log_;
    std::deque<BytesPtr> decode_queue_;
    std::deque<uint64_t> check_queue_;
    uint64_t next_handle_ = 0;
};

}  // namespace codecast
