#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "codecast/codec.hpp"
#include "codecast/decoder.hpp"
#include "codecast/rate_control.hpp"
#include "codecast/rng.hpp"

namespace codecast {

enum class MsgKind : uint8_t { kCodeword, kLossReport, kKeyExchange };

// Loss report wire format: count (2 bytes BE) followed by count seqnos
// (8 bytes BE each).
Bytes encode_loss_report(const std::vector<uint64_t>& seqnos);
std::vector<uint64_t> parse_loss_report(const Bytes& wire);

struct NodeConfig {
    uint32_t k = 50;               // coding window capacity
    double soliton_c = 0.03;
    double soliton_delta = 0.5;
    uint32_t max_degree = 0;       // 0 means "no cap" (cap at k)
    uint32_t id_bytes = 4;         // h
    uint32_t payload_size = 128;   // t
    uint32_t peel_window = 100000; // m
    double timeout = 0.0005;       // tau, seconds
    bool keep_decoded_log = true;  // forwarded to the decoder
    RateControllerConfig rate;

    // Adversarial behaviors (normal nodes leave both false).
    bool silent = false;  // receive and decode, but never transmit anything
    bool censor = false;  // drop censor-marked transactions from the window
};

// One protocol participant: a coding window, a joint decoder across all
// incoming links, and a rate controller per outgoing link.  The embedder
// (simulator or a real transport) delivers wire bytes and schedules send
// slots / timeout ticks; the node never touches a clock itself.
class Node {
public:
    Node(uint32_t node_id, const NodeConfig& cfg, uint64_t rng_seed);

    // Registers a bidirectional peer: draws a fresh inbound key (which the
    // peer must use for codewords it sends us) and opens an outbound
    // session.  Returns the peer index used by all other calls.
    uint32_t add_peer(uint32_t peer_node_id);
    // Completes the zero-cost key exchange for the outbound direction.
    void set_outbound_key(uint32_t peer, const HashKey& key);
    const HashKey& inbound_key(uint32_t peer) const { return sessions_[peer].inbound_key; }

    // Installed by the embedder.
    std::function<void(uint32_t peer, Bytes&& wire, MsgKind kind)> send;
    // Fires once per distinct transaction this node decodes (never for its
    // own locally created transactions).
    std::function<void(const Digest& digest, const BytesPtr& payload, double now)> on_decoded;
    // Tells a censoring node which transactions to suppress.
    std::function<bool(const Digest& digest)> is_censor_target;

    void on_local_transaction(const Transaction& tx, double now);

    // Fires when the pacer for `peer` has a slot.  Encodes and transmits one
    // codeword unless the window is empty (an empty-window slot is skipped
    // without charging the controller).  Returns the time of the next slot.
    double on_send_slot(uint32_t peer, double now);

    void on_receive(uint32_t peer, const Bytes& wire, MsgKind kind, double now);

    // Periodic housekeeping; call every timeout/2.  Emits one batched loss
    // report per link that had codewords expire since the last tick.
    void on_timeout_tick(double now);

    uint32_t id() const { return node_id_; }
    const NodeConfig& config() const { return cfg_; }
    size_t peer_count() const { return sessions_.size(); }
    double rate(uint32_t peer) const { return sessions_[peer].controller.rate(); }
    const DecoderState& decoder() const { return decoder_; }
    DecoderState& decoder() { return decoder_; }
    const CodingWindow& window() const { return window_; }

    struct SessionStats {
        uint32_t peer_node = 0;
        uint64_t codewords_sent = 0;
        uint64_t codewords_received = 0;
        uint64_t reports_received = 0;     // loss events our peer reported to us
        uint64_t loss_events_emitted = 0;  // loss events we reported to the peer
        uint64_t bytes_down = 0;           // bytes received over this link
    };
    const SessionStats& session_stats(uint32_t peer) const { return sessions_[peer].stats; }

    // Node-wide counters.
    uint64_t bytes_down = 0;      // every byte delivered to this node
    uint64_t decoded_bytes = 0;   // payload bytes of distinct decoded transactions
    uint64_t txs_decoded = 0;     // distinct transactions decoded
    uint64_t parse_failures = 0;  // malformed wire buffers dropped

private:
    struct Session {
        uint32_t peer_node = 0;
        HashKey inbound_key{};
        HashKey outbound_key{};
        bool outbound_ready = false;
        uint32_t decoder_link = 0;
        RateController controller;
        uint64_t next_seqno = 0;
        SessionStats stats;

        explicit Session(const RateControllerConfig& rc) : controller(rc) {}
    };

    void accept_decoded(const BytesPtr& payload, double now);

    uint32_t node_id_;
    NodeConfig cfg_;
    Rng rng_;
    CodingWindow window_;
    DegreeDistribution dist_;
    DecoderState decoder_;
    std::vector<Session> sessions_;
};

}  // namespace codecast
