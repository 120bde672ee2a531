#include <map>
#include <stdexcept>

#include "sim_common.hpp"

namespace codecast::sim {

namespace {

// Flooding pushes whole transactions; the two pull-based schemes announce a
// 32-byte hash and transfer the body on request.
constexpr uint64_t kHashBytes = 32;

enum class Msg : uint8_t { kTx, kAnnounce, kRequest };

// Event-driven simulation of the three baseline broadcast schemes.  Bodies
// and hashes are modeled as byte counts only; `uid` stands in for content.
class BaselineSim {
public:
    BaselineSim(const ExperimentConfig& cfg, const Topology& topo)
        : cfg_(cfg), topo_(topo), plan_(plan_adversary(cfg, topo.n)), accum_(cfg, plan_) {
        if (cfg.adversary == AdversaryMode::kCensorDistributed ||
            cfg.adversary == AdversaryMode::kZeroDelay)
            throw std::invalid_argument(
                "censor adversaries apply to the coded scheme only; baselines support "
                "adversary = silent");
        n_ = plan_.n_total;
        links_.resize(n_);
        auto adj = topo_.adjacency();
        for (uint32_t i = 0; i < n_; ++i)
            for (auto [peer, edge] : adj[i]) links_[i].push_back({peer, topo_.edges[edge].delay});
    }

    MetricsReport run();

private:
    struct PeerLink {
        uint32_t peer = 0;
        double delay = 0.0;
    };

    // Pull state per (node, transaction); erased as soon as the body arrives.
    struct Pull {
        std::vector<uint32_t> announcers;  // arrival order
        uint32_t next = 0;                 // round-robin retry cursor
        double deadline = 0.0;
    };

    uint64_t msg_bytes(Msg m) const { return m == Msg::kTx ? cfg_.tx_size : kHashBytes; }

    void send_msg(uint32_t from, uint32_t to, double link_delay, double extra, Msg m, uint32_t uid) {
        q_.after(link_delay + extra, [this, from, to, m, uid] {
            link_bytes_ += msg_bytes(m);
            receive(to, from, m, uid);
        });
    }

    void announce_to_peers(uint32_t node, uint32_t uid, uint32_t exclude) {
        for (const PeerLink& l : links_[node]) {
            if (l.peer == exclude) continue;
            double jitter =
                cfg_.scheme == Scheme::kBitcoin && cfg_.jitter_max > 0.0 ? rng_.uniform(cfg_.jitter_max)
                                                                         : 0.0;
            send_msg(node, l.peer, l.delay, jitter, Msg::kAnnounce, uid);
        }
    }

    void on_create(const TxInfo& tx) {
        known_[tx.creator][tx.uid] = 1;
        if (plan_.silent[tx.creator]) return;  // defensive: silent nodes never create
        if (cfg_.scheme == Scheme::kFlooding) {
            for (const PeerLink& l : links_[tx.creator])
                send_msg(tx.creator, l.peer, l.delay, 0.0, Msg::kTx, tx.uid);
        } else {
            announce_to_peers(tx.creator, tx.uid, kNoPeer);
        }
    }

    void learn(uint32_t node, uint32_t from, uint32_t uid) {
        known_[node][uid] = 1;
        decoded_bytes_[node] += cfg_.tx_size;
        if (!plan_.adversarial[node]) ++honest_decoded_;
        accum_.on_deliver(node, txs_[uid], q_.now());
        switch (cfg_.scheme) {
            case Scheme::kFlooding:
                if (!plan_.silent[node])
                    for (const PeerLink& l : links_[node]) send_msg(node, l.peer, l.delay, 0.0, Msg::kTx, uid);
                break;
            case Scheme::kBitcoin:
                announce_to_peers(node, uid, from);
                break;
            case Scheme::kShrec:
                pulls_[node].erase(uid);
                announce_to_peers(node, uid, from);
                break;
            default:
                break;
        }
    }

    void receive(uint32_t node, uint32_t from, Msg m, uint32_t uid) {
        bytes_down_[node] += msg_bytes(m);
        switch (m) {
            case Msg::kTx:
                if (!known_[node][uid]) learn(node, from, uid);
                break;
            case Msg::kAnnounce:
                if (known_[node][uid]) break;
                if (cfg_.scheme == Scheme::kBitcoin) {
                    // Request from every announcer until the body arrives; the
                    // jitter is what keeps the duplicate count low.
                    send_msg(node, from, link_delay(node, from), 0.0, Msg::kRequest, uid);
                } else {
                    Pull& p = pulls_[node][uid];
                    p.announcers.push_back(from);
                    if (p.announcers.size() == 1) {
                        p.deadline = q_.now() + cfg_.request_timeout;
                        send_msg(node, from, link_delay(node, from), 0.0, Msg::kRequest, uid);
                    }
                }
                break;
            case Msg::kRequest:
                // Silent nodes advertise but never answer.
                if (plan_.silent[node]) break;
                if (known_[node][uid]) send_msg(node, from, link_delay(node, from), 0.0, Msg::kTx, uid);
                break;
        }
    }

    double link_delay(uint32_t node, uint32_t peer) const {
        for (const PeerLink& l : links_[node])
            if (l.peer == peer) return l.delay;
        throw std::logic_error("baseline: message from a non-neighbor");
    }

    // Retries expired pull requests; fired several times per timeout period,
    // so a retry happens within [timeout, timeout + sweep interval).
    void sweep_pulls(double dt) {
        q_.after(dt, [this, dt] {
            double now = q_.now();
            for (uint32_t i = 0; i < n_; ++i) {
                for (auto& [uid, p] : pulls_[i]) {
                    if (now < p.deadline) continue;
                    p.next = (p.next + 1) % p.announcers.size();
                    p.deadline = now + cfg_.request_timeout;
                    send_msg(i, p.announcers[p.next], link_delay(i, p.announcers[p.next]), 0.0,
                             Msg::kRequest, uid);
                }
            }
            if (now < cfg_.duration) sweep_pulls(dt);
        });
    }

    void schedule_sample(double dt) {
        q_.after(dt, [this, dt] {
            series_.push_back({q_.now(), honest_decoded_, 0.0});
            if (q_.now() < cfg_.duration) schedule_sample(dt);
        });
    }

    static constexpr uint32_t kNoPeer = UINT32_MAX;

    ExperimentConfig cfg_;
    Topology topo_;
    AdversaryPlan plan_;
    MetricsAccum accum_;
    uint32_t n_ = 0;

    EventQueue q_;
    Rng rng_{0};
    std::vector<std::vector<PeerLink>> links_;
    std::vector<TxInfo> txs_;
    std::vector<std::vector<char>> known_;
    std::vector<std::map<uint32_t, Pull>> pulls_;  // ordered: iterated during sweeps
    std::vector<uint64_t> bytes_down_, decoded_bytes_;
    uint64_t link_bytes_ = 0;  // bytes that completed their link crossing
    uint64_t honest_decoded_ = 0;
    std::vector<SeriesPoint> series_;
};

MetricsReport BaselineSim::run() {
    rng_ = Rng(derive_seed(cfg_.seed, kSeedJitter));
    schedule_workload(q_, cfg_, plan_, txs_, accum_, /*with_payload=*/false,
                      [this](const TxInfo& tx) { on_create(tx); });
    known_.assign(n_, std::vector<char>(txs_.size(), 0));
    pulls_.resize(n_);
    bytes_down_.assign(n_, 0);
    decoded_bytes_.assign(n_, 0);

    q_.at(accum_.warmup_time(), [this] {
        for (uint32_t i = 0; i < n_; ++i) accum_.snapshot(i, bytes_down_[i], decoded_bytes_[i]);
    });
    if (cfg_.scheme == Scheme::kShrec) sweep_pulls(std::min(cfg_.request_timeout / 8.0, 0.5));
    schedule_sample(cfg_.duration / 100.0);

    q_.run_until(cfg_.duration);

    // Conservation of traffic: every byte delivered over a link must appear
    // in exactly one node's download counter.
    uint64_t down_total = 0;
    for (uint64_t b : bytes_down_) down_total += b;
    if (down_total != link_bytes_)
        throw std::logic_error("baseline: downloaded bytes do not match link bytes");

    MetricsReport r = accum_.finalize(cfg_, bytes_down_, decoded_bytes_);
    r.series = std::move(series_);
    return r;
}

}  // namespace

MetricsReport run_baseline(const ExperimentConfig& cfg, const Topology& topo) {
    return BaselineSim(cfg, topo).run();
}

}  // namespace codecast::sim
