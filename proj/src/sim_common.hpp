#pragma once

// Internal plumbing shared by the coded simulator and the baseline schemes:
// adversary selection, the Poisson workload, and metric accumulation.

#include <functional>
#include <vector>

#include "codecast/bytes.hpp"
#include "codecast/hash.hpp"
#include "codecast/rng.hpp"
#include "codecast/sim/config.hpp"
#include "codecast/sim/event_queue.hpp"
#include "codecast/sim/metrics.hpp"
#include "codecast/sim/topology.hpp"

namespace codecast::sim {

// Seed stream labels (second argument of derive_seed).
enum : uint64_t {
    kSeedTopology = 1,
    kSeedDelays = 2,
    kSeedAdversary = 3,
    kSeedWorkload = 4,
    kSeedNode = 5,
    kSeedStagger = 6,
    kSeedJitter = 7,
};

struct TxInfo {
    uint32_t uid = 0;
    uint32_t creator = 0;
    double created_at = 0.0;
    bool censored = false;
    BytesPtr data;  // only populated when the scheme moves real payloads
};

// Which nodes are adversarial, and the final node count (zero-delay
// attackers are appended past the original n).
struct AdversaryPlan {
    uint32_t n_original = 0;
    uint32_t n_total = 0;
    std::vector<char> adversarial;  // size n_total
    std::vector<char> silent;       // receive but never transmit
    std::vector<char> censor;       // suppress censor-marked transactions
};

AdversaryPlan plan_adversary(const ExperimentConfig& cfg, uint32_t n);

// Appends attacker nodes adjacent to every original node with zero delay.
void append_zero_delay_attackers(Topology& topo, uint32_t count);

// Per-node metric accumulation over the measurement window.
class MetricsAccum {
public:
    MetricsAccum(const ExperimentConfig& cfg, const AdversaryPlan& plan);

    void on_create(const TxInfo& tx);
    // First receipt of `tx` at `node` (never the creator).
    void on_deliver(uint32_t node, const TxInfo& tx, double now);
    bool measured(uint32_t node) const { return measured_[node]; }
    double warmup_time() const { return warmup_; }
    uint64_t deliveries() const { return deliveries_; }

    // Counter snapshots at the warmup boundary.
    void snapshot(uint32_t node, uint64_t bytes_down, uint64_t decoded_bytes);

    MetricsReport finalize(const ExperimentConfig& cfg,
                           const std::vector<uint64_t>& bytes_down,
                           const std::vector<uint64_t>& decoded_bytes) const;

private:
    struct PerNode {
        uint64_t own = 0;        // measured transactions this node created
        uint64_t delivered = 0;  // measured transactions received
        double lat_sum = 0.0;
        uint64_t cen_own = 0;
        uint64_t cen_delivered = 0;
        double cen_lat_sum = 0.0;
        uint64_t bytes_down_snap = 0;
        uint64_t decoded_bytes_snap = 0;
    };

    double warmup_ = 0.0;
    double end_ = 0.0;
    std::vector<char> measured_;
    std::vector<char> tx_in_window_;  // indexed by uid
    std::vector<PerNode> pn_;
    uint64_t txs_measured_ = 0;
    uint64_t censored_measured_ = 0;
    uint64_t deliveries_ = 0;  // measured first receipts at measured nodes
};

// Poisson transaction creation shared by every scheme.  Fills `txs` up
// front (it must not grow afterwards — events point into it) and schedules
// one on_create event per transaction.  Creators are the non-silent
// original nodes; the aggregate rate is cfg.tx_rate.
void schedule_workload(EventQueue& q, const ExperimentConfig& cfg, const AdversaryPlan& plan,
                       std::vector<TxInfo>& txs, MetricsAccum& accum, bool with_payload,
                       std::function<void(const TxInfo&)> on_create);

// Implemented in baselines.cpp: flooding, hash-flooding with jitter, and
// pull-based request/response broadcast.
MetricsReport run_baseline(const ExperimentConfig& cfg, const Topology& topo);

}  // namespace codecast::sim
