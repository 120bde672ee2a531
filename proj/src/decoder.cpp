#include "codecast/decoder.hpp"

#include <algorithm>

namespace codecast {

DecoderState::DecoderState(DecoderConfig cfg) : cfg_(cfg) {
    if (cfg_.id_bytes == 0 || cfg_.id_bytes > 8)
        throw std::runtime_error("decoder: id_bytes must be in 1..8");
    if (cfg_.payload_size == 0) throw std::runtime_error("decoder: payload_size must be positive");
    if (cfg_.peel_window == 0) throw std::runtime_error("decoder: peel_window must be positive");
    if (cfg_.timeout <= 0.0) throw std::runtime_error("decoder: timeout must be positive");
    if (cfg_.pending_cap == 0) throw std::runtime_error("decoder: pending_cap must be positive");
    intern = [](Bytes&& b) { return std::make_shared<const Bytes>(std::move(b)); };
}

uint32_t DecoderState::add_link(const HashKey& key) {
    Link link;
    link.key = key;
    links_.push_back(std::move(link));
    return static_cast<uint32_t>(links_.size() - 1);
}

size_t DecoderState::pending_count(uint32_t link) const { return links_.at(link).pending_live; }

void DecoderState::index_decoded(Link& link, uint64_t id, const BytesPtr& tx) {
    link.id_index[id] = tx;  // newer decode shadows an older one with the same ID
    link.id_order.emplace_back(id, tx);
    while (link.id_index.size() > cfg_.peel_window) {
        auto& [old_id, old_tx] = link.id_order.front();
        auto it = link.id_index.find(old_id);
        if (it != link.id_index.end() && it->second == old_tx) link.id_index.erase(it);
        link.id_order.pop_front();
    }
}

void DecoderState::drop_pending(uint64_t handle, Pending& pc) {
    Link& link = links_[pc.link];
    for (uint64_t id : pc.unresolved) {
        auto range = link.edges.equal_range(id);
        for (auto it = range.first; it != range.second; ++it) {
            if (it->second == handle) {
                link.edges.erase(it);
                break;
            }
        }
    }
    link.pending_live--;
    pending_.erase(handle);
}

void DecoderState::finalize_degree1(uint64_t handle) {
    auto pit = pending_.find(handle);
    if (pit == pending_.end()) return;
    Pending& pc = pit->second;
    if (pc.unresolved.size() != 1) return;
    Link& link = links_[pc.link];
    uint64_t last_id = pc.unresolved[0];
    bool valid = short_id(link.key, pc.payload, cfg_.id_bytes) == last_id;
    Bytes payload;
    if (valid) payload = std::move(pc.payload);
    drop_pending(handle, pc);
    if (!valid) {
        corrupted++;
        return;
    }
    BytesPtr tx = intern(std::move(payload));
    decode_queue_.push_back(tx);
}

void DecoderState::process_decoded(BytesPtr tx, std::vector<BytesPtr>& out) {
    out.push_back(tx);
    if (cfg_.keep_decoded_log) decoded_log_.push_back(tx);
    for (Link& link : links_) {
        uint64_t id = short_id(link.key, *tx, cfg_.id_bytes);
        index_decoded(link, id, tx);
        // Peel this transaction out of every pending codeword on this link
        // that still lists the ID as unresolved.
        auto range = link.edges.equal_range(id);
        if (range.first == range.second) continue;
        std::vector<uint64_t> handles;
        for (auto it = range.first; it != range.second; ++it) handles.push_back(it->second);
        link.edges.erase(id);
        for (uint64_t handle : handles) {
            Pending& pc = pending_.at(handle);
            xor_into(pc.payload, *tx);
            pc.unresolved.erase(std::find(pc.unresolved.begin(), pc.unresolved.end(), id));
            if (pc.unresolved.size() == 1) {
                check_queue_.push_back(handle);
            } else if (pc.unresolved.empty()) {
                // Peeled down to nothing: every source was decoded elsewhere
                // in this cascade, so the codeword carries no new data.
                fully_covered++;
                drop_pending(handle, pc);
            }
        }
    }
}

void DecoderState::drain_queues(std::vector<BytesPtr>& out) {
    // Newly decoded transactions are indexed and peeled before any further
    // degree-1 candidate is finalized.  The order matters: two pending
    // codewords can reduce to the same unknown transaction, and the second
    // must see the first one's decode (and be discarded as covered) rather
    // than emit a duplicate.
    while (!decode_queue_.empty() || !check_queue_.empty()) {
        if (!decode_queue_.empty()) {
            BytesPtr tx = std::move(decode_queue_.front());
            decode_queue_.pop_front();
            process_decoded(std::move(tx), out);
        } else {
            uint64_t handle = check_queue_.front();
            check_queue_.pop_front();
            finalize_degree1(handle);
        }
    }
}

std::vector<BytesPtr> DecoderState::ingest(uint32_t link_idx, const Codeword& cw, double now) {
    ingested++;
    std::vector<BytesPtr> out;
    if (link_idx >= links_.size()) throw std::runtime_error("decoder: unknown link");
    Link& link = links_[link_idx];

    if (cw.ids.empty() || cw.payload.size() != cfg_.payload_size) {
        malformed++;
        return out;
    }
    {
        std::vector<uint64_t> sorted = cw.ids;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            duplicate_id_drops++;
            return out;
        }
    }

    // Peel everything this link's index already knows.
    Bytes payload = cw.payload;
    std::vector<uint64_t> unresolved;
    for (uint64_t id : cw.ids) {
        auto it = link.id_index.find(id);
        if (it != link.id_index.end())
            xor_into(payload, *it->second);
        else
            unresolved.push_back(id);
    }

    if (unresolved.empty()) {
        fully_covered++;
        return out;
    }

    if (unresolved.size() == 1) {
        if (short_id(link.key, payload, cfg_.id_bytes) != unresolved[0]) {
            corrupted++;
            return out;
        }
        decode_queue_.push_back(intern(std::move(payload)));
    } else {
        uint64_t handle = next_handle_++;
        Pending pc;
        pc.link = link_idx;
        pc.seqno = cw.seqno;
        pc.payload = std::move(payload);
        pc.unresolved = std::move(unresolved);
        for (uint64_t id : pc.unresolved) link.edges.emplace(id, handle);
        pending_.emplace(handle, std::move(pc));
        link.pending_order.push_back(handle);
        link.pending_live++;
        timeout_queue_.emplace_back(now, handle);
        // Cap eviction: oldest pending codeword on this link goes first.
        while (link.pending_live > cfg_.pending_cap) {
            uint64_t old = link.pending_order.front();
            link.pending_order.pop_front();
            auto it = pending_.find(old);
            if (it != pending_.end()) drop_pending(old, it->second);
        }
    }

    drain_queues(out);
    return out;
}

std::vector<LossEvent> DecoderState::scan_timeouts(double now) {
    std::vector<LossEvent> events;
    while (!timeout_queue_.empty() && timeout_queue_.front().first + cfg_.timeout <= now) {
        uint64_t handle = timeout_queue_.front().second;
        timeout_queue_.pop_front();
        auto it = pending_.find(handle);
        if (it == pending_.end()) continue;  // decoded or evicted in time
        Pending& pc = it->second;
        if (pc.loss_reported) continue;
        pc.loss_reported = true;
        events.push_back(LossEvent{pc.link, pc.seqno, now});
    }
    return events;
}

}  // namespace codecast
