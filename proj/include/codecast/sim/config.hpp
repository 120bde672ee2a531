#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace codecast::sim {

enum class Scheme { kCoded, kFlooding, kBitcoin, kShrec };
enum class AdversaryMode { kNone, kCensorDistributed, kSilent, kZeroDelay };

// One experiment: scheme, topology, workload, protocol parameters, and an
// optional adversary.  Parsed from a "key = value" text file with '#'
// comments.  Unknown keys are rejected, except the assert.* namespace which
// carries recipe outcome assertions.
struct ExperimentConfig {
    Scheme scheme = Scheme::kCoded;

    // Topology: either generated (nodes/degree/delay model) or loaded.
    uint32_t nodes = 100;
    uint32_t degree = 8;
    std::string topology_file;  // empty = generate random regular
    double delay_median_ms = 70.0;
    double delay_sigma = 0.5;

    // Workload.
    double tx_rate = 400.0;  // aggregate transactions per second
    double duration = 100.0;
    double warmup_fraction = 0.2;
    uint32_t tx_size = 128;
    uint64_t seed = 1;

    // Coding parameters.
    uint32_t k = 50;
    double soliton_c = 0.03;
    double soliton_delta = 0.5;
    uint32_t max_degree = 0;  // 0 = cap at k
    uint32_t id_bytes = 4;
    uint32_t peel_window = 100000;
    double timeout = 0.0005;

    // Rate control.
    double gamma = 0.02;
    double alpha = 0.1;
    double r_min = 1.0;
    double r_max = 1e6;
    double initial_rate = 0.0;  // 0 = 2x expected per-node arrival rate

    // Baseline knobs.
    double jitter_max = 0.0;       // bitcoin: announcement jitter bound (s)
    double request_timeout = 30.0; // shrec: per-request retry timeout (s)

    // Adversary.
    AdversaryMode adversary = AdversaryMode::kNone;
    double adversary_fraction = 0.0;   // fraction of nodes that are adversarial
    double censored_fraction = 0.0;    // fraction of transactions marked censored
    uint32_t attacker_count = 0;       // zero-delay attackers appended to the graph

    // Variable-size mode: non-empty histogram turns on fragmentation; each
    // created transaction draws its size here and rides as fragment chains
    // of tx_size bytes.
    std::map<size_t, double> size_histogram;

    // Recipe assertions: metric name -> bound, evaluated after the run.
    // Supported keys are documented in docs/recipes.md.
    std::map<std::string, double> assertions;

    // Sweep entries: each is a set of config-key overrides producing one
    // run.  Parsed from repeated `sweep.entry = key=value ...` lines.
    std::vector<std::map<std::string, std::string>> sweep_entries;

    std::string label;  // optional display name
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// One config per sweep entry: the base config with that entry's overrides
// applied and re-validated.  A config without sweep entries expands to
// itself.  Entries that do not override `label` get "#<index>" appended.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

// "key=value key=value ..." rendering of a sweep entry, in key order.
std::string sweep_entry_name(const std::map<std::string, std::string>& entry);

std::string scheme_name(Scheme s);
std::string adversary_name(AdversaryMode m);

}  // namespace codecast::sim
