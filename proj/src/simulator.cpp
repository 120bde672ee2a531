#include "codecast/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "codecast/fragment.hpp"
#include "codecast/node.hpp"
#include "sim_common.hpp"

namespace codecast::sim {

Topology build_topology(const ExperimentConfig& cfg) {
    if (!cfg.topology_file.empty()) return load_topology(cfg.topology_file);
    Rng topo_rng(derive_seed(cfg.seed, kSeedTopology));
    Topology topo = random_regular(cfg.nodes, cfg.degree, topo_rng);
    Rng delay_rng(derive_seed(cfg.seed, kSeedDelays));
    assign_lognormal_delays(topo, std::log(cfg.delay_median_ms), cfg.delay_sigma, delay_rng);
    return topo;
}

namespace {

// Simulation of the coded broadcast scheme on a given topology.
class CodedSim {
public:
    CodedSim(const ExperimentConfig& cfg, const Topology& base)
        : cfg_(cfg), topo_(base), plan_(plan_adversary(cfg, base.n)), accum_(cfg, plan_) {
        if (cfg_.adversary == AdversaryMode::kZeroDelay)
            append_zero_delay_attackers(topo_, cfg_.attacker_count);
        n_ = plan_.n_total;
        reassembly_ = !cfg_.size_histogram.empty();
        node_cfg_ = make_node_config();
        build_network();
    }

    MetricsReport run();

private:
    struct PeerLink {
        uint32_t peer_node = 0;
        uint32_t remote_session = 0;  // our session index at the peer
        double delay = 0.0;
    };

    NodeConfig make_node_config() const {
        NodeConfig nc;
        nc.k = cfg_.k;
        nc.soliton_c = cfg_.soliton_c;
        nc.soliton_delta = cfg_.soliton_delta;
        nc.max_degree = cfg_.max_degree;
        nc.id_bytes = cfg_.id_bytes;
        nc.payload_size = cfg_.tx_size;
        nc.peel_window = cfg_.peel_window;
        nc.timeout = cfg_.timeout;
        nc.keep_decoded_log = false;
        nc.rate.gamma = cfg_.gamma;
        nc.rate.alpha = cfg_.alpha;
        nc.rate.r_min = cfg_.r_min;
        nc.rate.r_max = cfg_.r_max;
        double r0 = cfg_.initial_rate > 0.0 ? cfg_.initial_rate : 2.0 * cfg_.tx_rate;
        nc.rate.initial_rate = std::clamp(r0, cfg_.r_min, cfg_.r_max);
        return nc;
    }

    void build_network() {
        nodes_.reserve(n_);
        links_.resize(n_);
        for (uint32_t i = 0; i < n_; ++i) {
            NodeConfig nc = node_cfg_;
            nc.silent = plan_.silent[i] != 0;
            nc.censor = plan_.censor[i] != 0;
            nodes_.push_back(std::make_unique<Node>(i, nc, derive_seed(cfg_.seed, kSeedNode, i)));
        }
        for (const Topology::Edge& e : topo_.edges) {
            uint32_t su = nodes_[e.u]->add_peer(e.v);
            uint32_t sv = nodes_[e.v]->add_peer(e.u);
            nodes_[e.u]->set_outbound_key(su, nodes_[e.v]->inbound_key(sv));
            nodes_[e.v]->set_outbound_key(sv, nodes_[e.u]->inbound_key(su));
            links_[e.u].push_back({e.v, sv, e.delay});
            links_[e.v].push_back({e.u, su, e.delay});
        }
        for (uint32_t i = 0; i < n_; ++i) {
            Node* node = nodes_[i].get();
            node->send = [this, i](uint32_t sess, Bytes&& wire, MsgKind kind) {
                const PeerLink& l = links_[i][sess];
                q_.after(l.delay,
                         [this, to = l.peer_node, rs = l.remote_session, kind, w = std::move(wire)] {
                             link_bytes_ += w.size();
                             nodes_[to]->on_receive(rs, w, kind, q_.now());
                         });
            };
            node->on_decoded = [this, i](const Digest& digest, const BytesPtr& payload, double now) {
                handle_decoded(i, digest, payload, now);
            };
            node->is_censor_target = [this](const Digest& digest) {
                return censored_.count(digest) != 0;
            };
        }
        if (reassembly_) {
            frag_stores_.reserve(n_);
            for (uint32_t i = 0; i < n_; ++i) frag_stores_.emplace_back(4096);
        }
    }

    void on_create(const TxInfo& tx) {
        double now = q_.now();
        Node& node = *nodes_[tx.creator];
        tx_by_digest_.emplace(sha256(*tx.data), tx.uid);
        if (!reassembly_) {
            if (tx.censored) censored_.insert(sha256(*tx.data));
            node.on_local_transaction({tx.data, tx.created_at}, now);
            return;
        }
        for (const Fragment& f : fragment_transaction(*tx.data, cfg_.tx_size)) {
            auto wire = std::make_shared<Bytes>(serialize_fragment(f, cfg_.tx_size));
            if (tx.censored) censored_.insert(sha256(*wire));
            node.on_local_transaction({wire, tx.created_at}, now);
        }
    }

    void handle_decoded(uint32_t node, const Digest& digest, const BytesPtr& payload, double now) {
        if (!reassembly_) {
            auto it = tx_by_digest_.find(digest);
            if (it != tx_by_digest_.end()) accum_.on_deliver(node, txs_[it->second], now);
            return;
        }
        Fragment f;
        try {
            f = deserialize_fragment(*payload);
        } catch (const std::exception&) {
            return;  // decoded bytes that are not a well-formed fragment
        }
        for (const Bytes& whole : frag_stores_[node].insert(f, cfg_.tx_size)) {
            auto it = tx_by_digest_.find(sha256(whole));
            if (it != tx_by_digest_.end()) accum_.on_deliver(node, txs_[it->second], now);
        }
    }

    void schedule_send_slot(uint32_t node, uint32_t sess, double t) {
        q_.at(t, [this, node, sess] {
            double next = nodes_[node]->on_send_slot(sess, q_.now());
            schedule_send_slot(node, sess, next);
        });
    }

    void schedule_tick(double dt) {
        q_.after(dt, [this, dt] {
            for (auto& node : nodes_) node->on_timeout_tick(q_.now());
            if (q_.now() < cfg_.duration) schedule_tick(dt);
        });
    }

    void schedule_sample(double dt) {
        q_.after(dt, [this, dt] {
            SeriesPoint p;
            p.time = q_.now();
            double rate_sum = 0.0;
            size_t rate_count = 0;
            for (uint32_t i = 0; i < n_; ++i) {
                if (plan_.adversarial[i]) continue;
                p.decoded_total += nodes_[i]->txs_decoded;
                for (uint32_t s = 0; s < nodes_[i]->peer_count(); ++s) {
                    rate_sum += nodes_[i]->rate(s);
                    ++rate_count;
                }
            }
            p.mean_rate = rate_count ? rate_sum / double(rate_count) : 0.0;
            series_.push_back(p);
            if (q_.now() < cfg_.duration) schedule_sample(dt);
        });
    }

    ExperimentConfig cfg_;
    Topology topo_;
    AdversaryPlan plan_;
    MetricsAccum accum_;
    uint32_t n_ = 0;
    bool reassembly_ = false;
    NodeConfig node_cfg_;

    EventQueue q_;
    uint64_t link_bytes_ = 0;  // bytes that completed their link crossing
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::vector<PeerLink>> links_;
    std::vector<TxInfo> txs_;
    std::unordered_map<Digest, uint32_t, DigestHash> tx_by_digest_;
    std::unordered_set<Digest, DigestHash> censored_;
    std::vector<FragmentStore> frag_stores_;
    std::vector<SeriesPoint> series_;
};

MetricsReport CodedSim::run() {
    schedule_workload(q_, cfg_, plan_, txs_, accum_, /*with_payload=*/true,
                      [this](const TxInfo& tx) { on_create(tx); });

    q_.at(accum_.warmup_time(), [this] {
        for (uint32_t i = 0; i < n_; ++i)
            accum_.snapshot(i, nodes_[i]->bytes_down, nodes_[i]->decoded_bytes);
    });

    Rng stagger(derive_seed(cfg_.seed, kSeedStagger));
    double first_interval = 1.0 / node_cfg_.rate.initial_rate;
    for (uint32_t i = 0; i < n_; ++i) {
        if (plan_.silent[i]) continue;
        for (uint32_t s = 0; s < nodes_[i]->peer_count(); ++s)
            schedule_send_slot(i, s, stagger.uniform(first_interval));
    }

    schedule_tick(cfg_.timeout / 2.0);
    schedule_sample(cfg_.duration / 100.0);

    q_.run_until(cfg_.duration);

    std::vector<uint64_t> down(n_), dec(n_);
    uint64_t down_total = 0;
    for (uint32_t i = 0; i < n_; ++i) {
        down[i] = nodes_[i]->bytes_down;
        dec[i] = nodes_[i]->decoded_bytes;
        down_total += down[i];
    }
    // Conservation of traffic: every byte delivered over a link must appear
    // in exactly one node's download counter.
    if (down_total != link_bytes_)
        throw std::logic_error("simulator: downloaded bytes do not match link bytes");
    MetricsReport r = accum_.finalize(cfg_, down, dec);
    for (uint32_t i = 0; i < n_; ++i) {
        if (plan_.adversarial[i]) continue;
        for (uint32_t s = 0; s < nodes_[i]->peer_count(); ++s) {
            const auto& st = nodes_[i]->session_stats(s);
            LinkRate lr;
            lr.from = i;
            lr.to = st.peer_node;
            lr.rate = nodes_[i]->rate(s);
            lr.loss_rate = st.codewords_sent ? double(st.reports_received) / double(st.codewords_sent)
                                             : 0.0;
            r.link_rates.push_back(lr);
        }
    }
    r.series = std::move(series_);
    if (reassembly_) {
        r.has_reassembly = true;
        r.reassembled_latency = r.latency;
        r.reassembled_delivery = r.delivery;
    }
    return r;
}

}  // namespace

MetricsReport run_experiment_on(const ExperimentConfig& cfg, const Topology& topo) {
    if (cfg.scheme == Scheme::kCoded) return CodedSim(cfg, topo).run();
    return run_baseline(cfg, topo);
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
    Topology topo = build_topology(cfg);
    return run_experiment_on(cfg, topo);
}

}  // namespace codecast::sim
