#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace codecast::sim {

// Deterministic discrete-event loop: events fire in (time, insertion order).
// Single-threaded; an event handler may schedule further events.
class EventQueue {
public:
    void at(double t, std::function<void()> fn) {
        if (t < now_) throw std::logic_error("event queue: scheduling into the past");
        uint32_t slot;
        if (!free_.empty()) {
            slot = free_.back();
            free_.pop_back();
            slots_[slot] = std::move(fn);
        } else {
            slot = static_cast<uint32_t>(slots_.size());
            slots_.push_back(std::move(fn));
        }
        heap_.push(Entry{t, seq_++, slot});
    }

    void after(double dt, std::function<void()> fn) { at(now_ + dt, std::move(fn)); }

    // Runs every event with time <= t_end, then advances the clock to t_end.
    void run_until(double t_end) {
        while (!heap_.empty() && heap_.top().t <= t_end) {
            Entry e = heap_.top();
            heap_.pop();
            if (e.t < now_) throw std::logic_error("event queue: time went backwards");
            now_ = e.t;
            std::function<void()> fn = std::move(slots_[e.slot]);
            slots_[e.slot] = nullptr;
            free_.push_back(e.slot);
            fn();
        }
        if (t_end > now_) now_ = t_end;
    }

    double now() const { return now_; }
    size_t pending() const { return heap_.size(); }

private:
    struct Entry {
        double t;
        uint64_t seq;
        uint32_t slot;
        bool operator>(const Entry& o) const {
            if (t != o.t) return t > o.t;
            return seq > o.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
    std::vector<std::function<void()>> slots_;
    std::vector<uint32_t> free_;
    double now_ = 0.0;
    uint64_t seq_ = 0;
};

}  // namespace codecast::sim
