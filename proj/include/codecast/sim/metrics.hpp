#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codecast/sim/config.hpp"

namespace codecast::sim {

// Per-node results over the post-warmup measurement window.
struct NodeMetrics {
    uint32_t node = 0;
    double mean_latency = 0.0;  // seconds, over measured transactions received
    double delivery = 0.0;      // fraction of measured transactions known
    double overhead = 0.0;      // downloaded bytes / decoded transaction bytes
};

// Distribution across nodes: both tails are reported so callers can pick the
// conservative side per metric (p95 for latency/overhead, p5 for delivery).
struct Summary {
    double p5 = 0.0;
    double mean = 0.0;
    double p95 = 0.0;
};

Summary summarize(std::vector<double> values);

struct LinkRate {
    uint32_t from = 0, to = 0;
    double rate = 0.0;       // codewords/s at end of run
    double loss_rate = 0.0;  // loss events / codewords over the run
};

struct SeriesPoint {
    double time = 0.0;
    uint64_t decoded_total = 0;  // decode events across honest nodes so far
    double mean_rate = 0.0;      // mean codeword rate across links (coded)
};

struct MetricsReport {
    std::string scheme;
    std::string label;
    uint64_t seed = 0;
    double duration = 0.0;
    double warmup = 0.0;
    uint32_t nodes = 0;           // honest nodes measured
    uint64_t txs_measured = 0;    // transactions created in the window

    std::vector<NodeMetrics> per_node;
    Summary latency, delivery, overhead;

    bool has_censored = false;
    Summary censored_latency, censored_delivery;
    uint64_t censored_txs = 0;

    bool has_reassembly = false;
    Summary reassembled_latency, reassembled_delivery;

    std::vector<LinkRate> link_rates;  // coded scheme only
    std::vector<SeriesPoint> series;
};

// CSV: one row per node: node_id,mean_latency_s,delivery_rate,overhead.
void write_metrics_csv(const MetricsReport& r, const std::string& path);

// JSON: distribution summaries, per-link rates, and the time series (see
// docs/metrics-schema.json).
void write_metrics_json(const MetricsReport& r, const std::string& path);
std::string metrics_json_string(const MetricsReport& r);

// Evaluates recipe assertions against a report; returns human-readable
// failure lines (empty = all pass).  Unknown assertion keys fail loudly.
std::vector<std::string> evaluate_assertions(const MetricsReport& r,
                                             const std::map<std::string, double>& assertions);

}  // namespace codecast::sim
