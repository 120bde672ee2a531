#include "codecast/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace codecast::sim {

using nlohmann::json;

Summary summarize(std::vector<double> values) {
    Summary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    auto pct = [&](double p) {
        size_t idx = static_cast<size_t>(std::ceil(p * static_cast<double>(values.size())));
        if (idx > 0) idx--;
        return values[std::min(idx, values.size() - 1)];
    };
    s.p5 = pct(0.05);
    s.p95 = pct(0.95);
    return s;
}

void write_metrics_csv(const MetricsReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    out << "node_id,mean_latency_s,delivery_rate,overhead\n";
    char buf[160];
    for (const auto& m : r.per_node) {
        std::snprintf(buf, sizeof(buf), "%u,%.9f,%.9f,%.9f\n", m.node, m.mean_latency,
                      m.delivery, m.overhead);
        out << buf;
    }
}

namespace {

json summary_json(const Summary& s) {
    return json{{"p5", s.p5}, {"mean", s.mean}, {"p95", s.p95}};
}

}  // namespace

std::string metrics_json_string(const MetricsReport& r) {
    json j;
    j["scheme"] = r.scheme;
    j["label"] = r.label;
    j["seed"] = r.seed;
    j["duration_s"] = r.duration;
    j["warmup_s"] = r.warmup;
    j["nodes"] = r.nodes;
    j["txs_measured"] = r.txs_measured;
    j["latency_s"] = summary_json(r.latency);
    j["delivery"] = summary_json(r.delivery);
    j["overhead"] = summary_json(r.overhead);
    if (r.has_censored) {
        j["censored"] = {{"txs", r.censored_txs},
                         {"latency_s", summary_json(r.censored_latency)},
                         {"delivery", summary_json(r.censored_delivery)}};
    }
    if (r.has_reassembly) {
        j["reassembled"] = {{"latency_s", summary_json(r.reassembled_latency)},
                            {"delivery", summary_json(r.reassembled_delivery)}};
    }
    json rates = json::array();
    for (const auto& lr : r.link_rates)
        rates.push_back(
            {{"from", lr.from}, {"to", lr.to}, {"rate", lr.rate}, {"loss_rate", lr.loss_rate}});
    j["link_rates"] = rates;
    json series = json::array();
    for (const auto& p : r.series)
        series.push_back(
            {{"time", p.time}, {"decoded_total", p.decoded_total}, {"mean_rate", p.mean_rate}});
    j["series"] = series;
    return j.dump(2) + "\n";
}

void write_metrics_json(const MetricsReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_json: cannot open " + path);
    out << metrics_json_string(r);
}

std::vector<std::string> evaluate_assertions(const MetricsReport& r,
                                             const std::map<std::string, double>& assertions) {
    std::vector<std::string> failures;
    auto check = [&](const std::string& key, double actual, bool is_min, double bound) {
        bool ok = is_min ? actual >= bound : actual <= bound;
        if (!ok) {
            char buf[256];
            std::snprintf(buf, sizeof(buf), "assert.%s: actual %.6g violates bound %.6g",
                          key.c_str(), actual, bound);
            failures.emplace_back(buf);
        }
    };
    for (const auto& [key, bound] : assertions) {
        if (key == "delivery_p5_min")
            check(key, r.delivery.p5, true, bound);
        else if (key == "delivery_mean_min")
            check(key, r.delivery.mean, true, bound);
        else if (key == "latency_p95_max")
            check(key, r.latency.p95, false, bound);
        else if (key == "latency_mean_max")
            check(key, r.latency.mean, false, bound);
        else if (key == "overhead_p95_max")
            check(key, r.overhead.p95, false, bound);
        else if (key == "overhead_mean_max")
            check(key, r.overhead.mean, false, bound);
        else if (key == "overhead_mean_min")
            check(key, r.overhead.mean, true, bound);
        else if (key == "censored_delivery_mean_min")
            check(key, r.censored_delivery.mean, true, bound);
        else if (key == "censored_latency_mean_max")
            check(key, r.censored_latency.mean, false, bound);
        else if (key == "reassembled_delivery_mean_min")
            check(key, r.reassembled_delivery.mean, true, bound);
        else
            failures.push_back("assert." + key + ": unknown assertion key");
    }
    return failures;
}

}  // namespace codecast::sim
