#pragma once

// Purpose-built experiment harnesses that exercise the library outside the
// full network simulation: single-link code overhead, the two-sender rate
// controller demonstration, and a codec throughput benchmark.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace codecast {

// Codewords sent per transaction decoded over one lossless link, for block
// coding over fixed k-transaction generations versus a sliding window over
// a long stream (sends gated on the oldest window entry being decoded
// before it slides out).
struct LtOverheadResult {
    double block = 0.0;
    double windowed = 0.0;
};

LtOverheadResult lt_overhead(uint32_t k, double c, double delta, uint32_t n_txs,
                             uint32_t tx_size, uint64_t seed);

// Two senders A and B share a receiver C.  A takes 600 unique tps, B takes
// 100 unique tps, and both take a common 400 tps flow; each paces codewords
// to C with its own controller, and C reports decode losses back.  Repeated
// for each initial (rate_a, rate_b) pair.
struct ControllerDemoConfig {
    double duration = 40.0;
    double steady_window = 0.25;  // trailing fraction used for steady state
    uint64_t seed = 1;
    double link_delay = 0.010;
    double sample_interval = 0.1;
    uint32_t k = 50;
    uint32_t id_bytes = 4;
    uint32_t tx_size = 128;
    double timeout = 0.0005;
    double gamma = 0.02;
    double alpha = 0.1;
    double rate_a_unique = 600.0;
    double rate_b_unique = 100.0;
    double rate_shared = 400.0;
    std::vector<std::pair<double, double>> inits = {{100.0, 100.0}, {2000.0, 50.0}, {50.0, 2000.0}};
};

struct ControllerDemoRun {
    double init_a = 0.0, init_b = 0.0;
    // t, rate_a, rate_b, loss_a, loss_b (losses over the trailing sample bin).
    std::vector<std::array<double, 5>> samples;
    double steady_rate_a = 0.0, steady_rate_b = 0.0;
    double steady_loss_a = 0.0, steady_loss_b = 0.0;
};

struct ControllerDemoResult {
    std::vector<ControllerDemoRun> runs;
};

ControllerDemoResult controller_demo(const ControllerDemoConfig& cfg);

// Single-core codec benchmark: streams n_txs transactions through a sliding
// window encoder, then decodes the recorded codeword stream from scratch.
struct BenchResult {
    uint64_t txs = 0;
    uint64_t codewords = 0;
    double encode_seconds = 0.0;
    double decode_seconds = 0.0;
    double encode_codewords_per_s = 0.0;
    double decode_txs_per_s = 0.0;
    double decode_megabits_per_s = 0.0;  // decoded payload bits
    double codewords_per_tx = 0.0;
    bool correct = false;  // decoded set identical to the source set
};

BenchResult run_bench(uint32_t n_txs, uint32_t k, uint32_t tx_size, uint64_t seed);

}  // namespace codecast
