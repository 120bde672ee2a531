#include "sim_common.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codecast::sim {

namespace {

// Picks `count` distinct nodes out of [0, n) by partial Fisher-Yates.
std::vector<uint32_t> pick_nodes(uint32_t n, uint32_t count, Rng& rng) {
    std::vector<uint32_t> ids(n);
    for (uint32_t i = 0; i < n; ++i) ids[i] = i;
    for (uint32_t i = 0; i < count; ++i) {
        size_t j = i + rng.uniform_index(n - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(count);
    return ids;
}

}  // namespace

AdversaryPlan plan_adversary(const ExperimentConfig& cfg, uint32_t n) {
    AdversaryPlan plan;
    plan.n_original = n;
    plan.n_total = n;
    if (cfg.adversary == AdversaryMode::kZeroDelay) plan.n_total = n + cfg.attacker_count;

    plan.adversarial.assign(plan.n_total, 0);
    plan.silent.assign(plan.n_total, 0);
    plan.censor.assign(plan.n_total, 0);

    if (cfg.adversary == AdversaryMode::kCensorDistributed || cfg.adversary == AdversaryMode::kSilent) {
        auto count = static_cast<uint32_t>(std::llround(cfg.adversary_fraction * n));
        if (count >= n) throw std::invalid_argument("adversary_fraction leaves no honest nodes");
        Rng rng(derive_seed(cfg.seed, kSeedAdversary));
        for (uint32_t id : pick_nodes(n, count, rng)) {
            plan.adversarial[id] = 1;
            if (cfg.adversary == AdversaryMode::kSilent) {
                plan.silent[id] = 1;
            } else {
                plan.censor[id] = 1;
            }
        }
    } else if (cfg.adversary == AdversaryMode::kZeroDelay) {
        for (uint32_t a = n; a < plan.n_total; ++a) {
            plan.adversarial[a] = 1;
            plan.censor[a] = 1;
        }
    }
    return plan;
}

void append_zero_delay_attackers(Topology& topo, uint32_t count) {
    uint32_t n = topo.n;
    for (uint32_t a = n; a < n + count; ++a)
        for (uint32_t u = 0; u < n; ++u) topo.edges.push_back({u, a, 0.0});
    topo.n = n + count;
}

MetricsAccum::MetricsAccum(const ExperimentConfig& cfg, const AdversaryPlan& plan) {
    warmup_ = cfg.warmup_fraction * cfg.duration;
    end_ = cfg.duration;
    measured_.resize(plan.n_total);
    for (uint32_t i = 0; i < plan.n_total; ++i) measured_[i] = !plan.adversarial[i];
    pn_.resize(plan.n_total);
}

void MetricsAccum::on_create(const TxInfo& tx) {
    bool in_window = tx.created_at >= warmup_ && tx.created_at < end_;
    if (tx.uid != tx_in_window_.size())
        throw std::logic_error("metrics: transactions must be registered in uid order");
    tx_in_window_.push_back(in_window);
    if (!in_window) return;
    ++txs_measured_;
    if (measured_[tx.creator]) ++pn_[tx.creator].own;
    if (tx.censored) {
        ++censored_measured_;
        if (measured_[tx.creator]) ++pn_[tx.creator].cen_own;
    }
}

void MetricsAccum::on_deliver(uint32_t node, const TxInfo& tx, double now) {
    if (!measured_[node] || !tx_in_window_[tx.uid]) return;
    ++deliveries_;
    PerNode& p = pn_[node];
    ++p.delivered;
    p.lat_sum += now - tx.created_at;
    if (tx.censored) {
        ++p.cen_delivered;
        p.cen_lat_sum += now - tx.created_at;
    }
}

void MetricsAccum::snapshot(uint32_t node, uint64_t bytes_down, uint64_t decoded_bytes) {
    pn_[node].bytes_down_snap = bytes_down;
    pn_[node].decoded_bytes_snap = decoded_bytes;
}

MetricsReport MetricsAccum::finalize(const ExperimentConfig& cfg,
                                     const std::vector<uint64_t>& bytes_down,
                                     const std::vector<uint64_t>& decoded_bytes) const {
    MetricsReport r;
    r.scheme = scheme_name(cfg.scheme);
    r.label = cfg.label;
    r.seed = cfg.seed;
    r.duration = cfg.duration;
    r.warmup = warmup_;
    r.txs_measured = txs_measured_;

    std::vector<double> lat, del, ovh, cen_lat, cen_del;
    for (uint32_t i = 0; i < pn_.size(); ++i) {
        if (!measured_[i]) continue;
        const PerNode& p = pn_[i];
        NodeMetrics nm;
        nm.node = i;
        nm.delivery = txs_measured_ ? double(p.own + p.delivered) / double(txs_measured_) : 0.0;
        nm.mean_latency = p.delivered ? p.lat_sum / double(p.delivered) : 0.0;
        uint64_t down = bytes_down[i] - p.bytes_down_snap;
        uint64_t dec = decoded_bytes[i] - p.decoded_bytes_snap;
        nm.overhead = dec ? double(down) / double(dec) : 0.0;
        r.per_node.push_back(nm);
        del.push_back(nm.delivery);
        ovh.push_back(nm.overhead);
        if (p.delivered) lat.push_back(nm.mean_latency);
        if (censored_measured_) {
            cen_del.push_back(double(p.cen_own + p.cen_delivered) / double(censored_measured_));
            if (p.cen_delivered) cen_lat.push_back(p.cen_lat_sum / double(p.cen_delivered));
        }
    }
    r.nodes = static_cast<uint32_t>(r.per_node.size());
    r.latency = summarize(std::move(lat));
    r.delivery = summarize(std::move(del));
    r.overhead = summarize(std::move(ovh));
    if (censored_measured_) {
        r.has_censored = true;
        r.censored_txs = censored_measured_;
        r.censored_latency = summarize(std::move(cen_lat));
        r.censored_delivery = summarize(std::move(cen_del));
    }
    return r;
}

void schedule_workload(EventQueue& q, const ExperimentConfig& cfg, const AdversaryPlan& plan,
                       std::vector<TxInfo>& txs, MetricsAccum& accum, bool with_payload,
                       std::function<void(const TxInfo&)> on_create) {
    std::vector<uint32_t> creators;
    for (uint32_t i = 0; i < plan.n_original; ++i)
        if (!plan.silent[i]) creators.push_back(i);
    if (creators.empty()) throw std::invalid_argument("workload: no transaction creators left");

    Rng rng(derive_seed(cfg.seed, kSeedWorkload));
    std::vector<size_t> sizes;
    std::vector<double> size_cdf;
    if (!cfg.size_histogram.empty()) {
        double total = 0.0;
        for (auto& [sz, w] : cfg.size_histogram) total += w;
        double acc = 0.0;
        for (auto& [sz, w] : cfg.size_histogram) {
            acc += w / total;
            sizes.push_back(sz);
            size_cdf.push_back(acc);
        }
    }

    double t = 0.0;
    while (true) {
        t += rng.exponential(cfg.tx_rate);
        if (t >= cfg.duration) break;
        TxInfo tx;
        tx.uid = static_cast<uint32_t>(txs.size());
        tx.creator = creators[rng.uniform_index(creators.size())];
        tx.created_at = t;
        tx.censored = !plan.adversarial[tx.creator] && cfg.censored_fraction > 0.0 &&
                      rng.uniform() < cfg.censored_fraction;
        if (with_payload) {
            size_t sz = cfg.tx_size;
            if (!sizes.empty()) {
                double u = rng.uniform();
                size_t idx = std::lower_bound(size_cdf.begin(), size_cdf.end(), u) - size_cdf.begin();
                sz = sizes[std::min(idx, sizes.size() - 1)];
            }
            tx.data = std::make_shared<Bytes>(rng.random_bytes(sz));
        }
        accum.on_create(tx);
        txs.push_back(tx);
    }
    // txs must not grow after this point: events hold pointers into it.
    auto cb = std::make_shared<std::function<void(const TxInfo&)>>(std::move(on_create));
    for (const TxInfo& tx : txs) {
        const TxInfo* p = &tx;
        q.at(p->created_at, [cb, p] { (*cb)(*p); });
    }
}

}  // namespace codecast::sim
