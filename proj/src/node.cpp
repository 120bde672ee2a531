#include "codecast/node.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace codecast {

Bytes encode_loss_report(const std::vector<uint64_t>& seqnos) {
    if (seqnos.empty()) throw std::runtime_error("loss report: empty");
    if (seqnos.size() > 0xffff) throw std::runtime_error("loss report: too many events");
    Bytes out;
    out.reserve(2 + 8 * seqnos.size());
    put_u16_be(out, static_cast<uint16_t>(seqnos.size()));
    for (uint64_t s : seqnos) put_u64_be(out, s);
    return out;
}

std::vector<uint64_t> parse_loss_report(const Bytes& wire) {
    if (wire.size() < 2) throw std::runtime_error("loss report: truncated");
    uint16_t count = get_u16_be(wire.data());
    if (count == 0 || wire.size() != 2 + size_t{8} * count)
        throw std::runtime_error("loss report: length mismatch");
    std::vector<uint64_t> seqnos(count);
    for (uint16_t i = 0; i < count; i++) seqnos[i] = get_u64_be(wire.data() + 2 + 8 * i);
    return seqnos;
}

namespace {

DecoderConfig decoder_config(const NodeConfig& cfg) {
    DecoderConfig dc;
    dc.id_bytes = cfg.id_bytes;
    dc.payload_size = cfg.payload_size;
    dc.peel_window = cfg.peel_window;
    dc.timeout = cfg.timeout;
    dc.pending_cap = 10 * cfg.k;
    dc.keep_decoded_log = cfg.keep_decoded_log;
    return dc;
}

}  // namespace

Node::Node(uint32_t node_id, const NodeConfig& cfg, uint64_t rng_seed)
    : node_id_(node_id),
      cfg_(cfg),
      rng_(rng_seed),
      window_(cfg.k),
      dist_(DegreeDistribution::robust_soliton(cfg.k, cfg.soliton_c, cfg.soliton_delta,
                                               cfg.max_degree == 0 ? cfg.k : cfg.max_degree)),
      decoder_(decoder_config(cfg)) {}

uint32_t Node::add_peer(uint32_t peer_node_id) {
    Session s(cfg_.rate);
    s.peer_node = peer_node_id;
    s.stats.peer_node = peer_node_id;
    Bytes key = rng_.random_bytes(16);
    std::copy(key.begin(), key.end(), s.inbound_key.begin());
    s.decoder_link = decoder_.add_link(s.inbound_key);
    sessions_.push_back(std::move(s));
    return static_cast<uint32_t>(sessions_.size() - 1);
}

void Node::set_outbound_key(uint32_t peer, const HashKey& key) {
    sessions_.at(peer).outbound_key = key;
    sessions_.at(peer).outbound_ready = true;
}

void Node::on_local_transaction(const Transaction& tx, double now) {
    (void)now;
    if (!tx.data) throw std::runtime_error("node: null transaction payload");
    if (tx.data->size() != cfg_.payload_size)
        throw std::runtime_error("node: transaction size does not match payload_size");
    Digest digest = sha256(*tx.data);
    if (cfg_.censor && is_censor_target && is_censor_target(digest)) {
        window_.remember(digest);
        return;
    }
    window_.insert(tx, digest);
}

double Node::on_send_slot(uint32_t peer, double now) {
    Session& s = sessions_.at(peer);
    if (cfg_.silent || window_.empty() || !s.outbound_ready) {
        // Skipped slot: nothing leaves, the controller is not charged.
        return s.controller.next_send_time(now);
    }
    Codeword cw = encode(window_, dist_, rng_, s.outbound_key, cfg_.id_bytes, s.next_seqno++);
    Bytes wire = serialize_codeword(cw, cfg_.id_bytes);
    s.stats.codewords_sent++;
    if (send) send(peer, std::move(wire), MsgKind::kCodeword);
    s.controller.on_codeword_sent();
    return s.controller.next_send_time(now);
}

void Node::accept_decoded(const BytesPtr& payload, double now) {
    Digest digest = sha256(*payload);
    if (cfg_.censor && is_censor_target && is_censor_target(digest)) {
        if (window_.remember(digest)) {
            txs_decoded++;
            decoded_bytes += payload->size();
            if (on_decoded) on_decoded(digest, payload, now);
        }
        return;
    }
    if (!window_.insert(Transaction{payload, now}, digest)) return;  // duplicate
    txs_decoded++;
    decoded_bytes += payload->size();
    if (on_decoded) on_decoded(digest, payload, now);
}

void Node::on_receive(uint32_t peer, const Bytes& wire, MsgKind kind, double now) {
    Session& s = sessions_.at(peer);
    bytes_down += wire.size();
    s.stats.bytes_down += wire.size();
    switch (kind) {
        case MsgKind::kCodeword: {
            Codeword cw;
            try {
                cw = deserialize_codeword(wire, cfg_.id_bytes, cfg_.payload_size);
            } catch (const std::runtime_error&) {
                parse_failures++;
                return;
            }
            s.stats.codewords_received++;
            auto decoded = decoder_.ingest(s.decoder_link, cw, now);
            for (const BytesPtr& tx : decoded) accept_decoded(tx, now);
            break;
        }
        case MsgKind::kLossReport: {
            std::vector<uint64_t> seqnos;
            try {
                seqnos = parse_loss_report(wire);
            } catch (const std::runtime_error&) {
                parse_failures++;
                return;
            }
            s.stats.reports_received += seqnos.size();
            s.controller.on_loss_events(static_cast<unsigned>(seqnos.size()));
            break;
        }
        case MsgKind::kKeyExchange: {
            if (wire.size() != 16) {
                parse_failures++;
                return;
            }
            HashKey key;
            std::copy(wire.begin(), wire.end(), key.begin());
            set_outbound_key(peer, key);
            break;
        }
    }
}

void Node::on_timeout_tick(double now) {
    auto events = decoder_.scan_timeouts(now);
    if (events.empty() || cfg_.silent) return;
    // Batch events per link into one report message each.
    std::map<uint32_t, std::vector<uint64_t>> by_link;
    for (const LossEvent& e : events) by_link[e.link].push_back(e.seqno);
    for (auto& [link, seqnos] : by_link) {
        // Decoder links are created in add_peer order, so link index ==
        // session index.
        Session& s = sessions_.at(link);
        s.stats.loss_events_emitted += seqnos.size();
        if (send) send(link, encode_loss_report(seqnos), MsgKind::kLossReport);
    }
}

}  // namespace codecast
