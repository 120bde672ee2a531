#pragma once

#include <algorithm>
#include <stdexcept>

namespace codecast {

struct RateControllerConfig {
    double gamma = 0.02;       // target fraction of codewords the peer may miss
    double alpha = 0.1;        // multiplicative step size
    double r_min = 1.0;        // codewords per second
    double r_max = 1e6;
    double initial_rate = 100.0;
};

// Per-link send-rate controller.  Every transmitted codeword nudges the rate
// down by a factor (1 - alpha*gamma); every loss event reported by the peer
// pushes it up by (1 + alpha).  When the peer misses exactly a gamma
// fraction of codewords the two forces cancel, so the loop settles where the
// peer just barely keeps up.
class RateController {
public:
    explicit RateController(RateControllerConfig cfg) : cfg_(cfg), rate_(cfg.initial_rate) {
        if (cfg_.gamma <= 0.0 || cfg_.gamma >= 1.0)
            throw std::runtime_error("rate controller: gamma must be in (0, 1)");
        if (cfg_.alpha <= 0.0) throw std::runtime_error("rate controller: alpha must be positive");
        if (cfg_.r_min <= 0.0 || cfg_.r_max < cfg_.r_min)
            throw std::runtime_error("rate controller: need 0 < r_min <= r_max");
        if (cfg_.initial_rate < cfg_.r_min || cfg_.initial_rate > cfg_.r_max)
            throw std::runtime_error("rate controller: initial rate out of range");
    }

    void on_codeword_sent() {
        rate_ = std::max(cfg_.r_min, rate_ * (1.0 - cfg_.alpha * cfg_.gamma));
    }

    void on_loss_event() { rate_ = std::min(cfg_.r_max, rate_ * (1.0 + cfg_.alpha)); }

    void on_loss_events(unsigned n) {
        for (unsigned i = 0; i < n; i++) on_loss_event();
    }

    // Deterministic pacing: the next codeword goes out one inter-send gap
    // from now at the current rate.  Rate updates between sends take effect
    // at the next scheduling decision.
    double next_send_time(double now) const { return now + 1.0 / rate_; }

    double rate() const { return rate_; }
    const RateControllerConfig& config() const { return cfg_; }

private:
    RateControllerConfig cfg_;
    double rate_;
};

}  // namespace codecast
