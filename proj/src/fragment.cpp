#include "codecast/fragment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codecast {

std::vector<Fragment> fragment_transaction(const Bytes& tx, size_t fragment_size) {
    if (fragment_size < kFragmentHeaderSize + 1)
        throw std::runtime_error("fragment: fragment_size must be at least 36");
    if (tx.empty()) throw std::runtime_error("fragment: empty transaction");
    size_t cap = fragment_size - kFragmentHeaderSize;
    if (cap > 0xffff) throw std::runtime_error("fragment: data capacity exceeds 65535");

    size_t count = (tx.size() + cap - 1) / cap;
    std::vector<Fragment> out;
    out.reserve(count);
    Digest prev{};
    for (size_t i = 0; i < count; i++) {
        Fragment f;
        if (i == 0) f.flags |= kFragmentFirst;
        if (i + 1 == count) f.flags |= kFragmentLast;
        f.prev_hash = prev;
        size_t off = i * cap;
        size_t len = std::min(cap, tx.size() - off);
        f.data.assign(tx.begin() + off, tx.begin() + off + len);
        // The next fragment points at the hash of this one's wire bytes.
        prev = sha256(serialize_fragment(f, fragment_size));
        out.push_back(std::move(f));
    }
    return out;
}

Bytes serialize_fragment(const Fragment& f, size_t fragment_size) {
    if (fragment_size < kFragmentHeaderSize + 1)
        throw std::runtime_error("fragment: fragment_size must be at least 36");
    size_t cap = fragment_size - kFragmentHeaderSize;
    if (f.data.size() > cap || f.data.empty())
        throw std::runtime_error("fragment: data length out of range");
    Bytes out;
    out.reserve(fragment_size);
    out.push_back(f.flags);
    out.insert(out.end(), f.prev_hash.begin(), f.prev_hash.end());
    put_u16_be(out, static_cast<uint16_t>(f.data.size()));
    out.insert(out.end(), f.data.begin(), f.data.end());
    out.resize(fragment_size, 0);  // zero padding
    return out;
}

Fragment deserialize_fragment(const Bytes& wire) {
    if (wire.size() < kFragmentHeaderSize + 1)
        throw std::runtime_error("fragment: wire buffer too short");
    Fragment f;
    f.flags = wire[0];
    std::copy(wire.begin() + 1, wire.begin() + 33, f.prev_hash.begin());
    size_t len = get_u16_be(wire.data() + 33);
    if (len == 0 || len > wire.size() - kFragmentHeaderSize)
        throw std::runtime_error("fragment: bad data length");
    f.data.assign(wire.begin() + 35, wire.begin() + 35 + len);
    return f;
}

FragmentStore::FragmentStore(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::runtime_error("fragment store: capacity must be positive");
}

void FragmentStore::try_complete(const Digest& last_hash, std::vector<Bytes>& out) {
    auto last_it = by_hash_.find(last_hash);
    if (last_it == by_hash_.end()) return;  // evicted while parked

    std::vector<const Fragment*> chain;
    const Fragment* cur = &last_it->second;
    chain.push_back(cur);
    while (!cur->first()) {
        auto it = by_hash_.find(cur->prev_hash);
        if (it == by_hash_.end()) {
            // Predecessor not here yet: park this walk on the missing hash.
            blocked_on_[cur->prev_hash].push_back(last_hash);
            return;
        }
        cur = &it->second;
        chain.push_back(cur);
    }

    Bytes tx;
    for (auto rit = chain.rbegin(); rit != chain.rend(); ++rit)
        tx.insert(tx.end(), (*rit)->data.begin(), (*rit)->data.end());
    out.push_back(std::move(tx));
}

std::vector<Bytes> FragmentStore::insert(const Fragment& f, size_t fragment_size) {
    std::vector<Bytes> out;
    Digest h = sha256(serialize_fragment(f, fragment_size));
    bool fresh = by_hash_.emplace(h, f).second;
    if (fresh) {
        arrival_order_.push_back(h);
        while (by_hash_.size() > capacity_) {
            by_hash_.erase(arrival_order_.front());
            arrival_order_.pop_front();
        }
        // Keep the parked-walk map bounded: drop walks whose LAST fragment
        // has itself been evicted.
        if (blocked_on_.size() > capacity_) {
            for (auto it = blocked_on_.begin(); it != blocked_on_.end();) {
                auto& walks = it->second;
                walks.erase(std::remove_if(walks.begin(), walks.end(),
                                           [&](const Digest& d) { return !contains(d); }),
                            walks.end());
                it = walks.empty() ? blocked_on_.erase(it) : std::next(it);
            }
        }
    }

    if (f.last() && fresh) try_complete(h, out);

    // Unblock any chain that was waiting for exactly this fragment.
    auto blocked = blocked_on_.find(h);
    if (blocked != blocked_on_.end()) {
        std::vector<Digest> walks = std::move(blocked->second);
        blocked_on_.erase(blocked);
        for (const Digest& last_hash : walks) try_complete(last_hash, out);
    }
    return out;
}

double fragmentation_overhead(const SizeHistogram& hist, size_t fragment_size) {
    if (fragment_size < kFragmentHeaderSize + 1)
        throw std::runtime_error("fragmentation_overhead: fragment_size must be at least 36");
    double wire = 0.0, data = 0.0;
    for (const auto& [size, freq] : hist) {
        if (size == 0 || freq < 0.0)
            throw std::runtime_error("fragmentation_overhead: bad histogram entry");
        size_t cap = fragment_size - kFragmentHeaderSize;
        double frags = std::ceil(static_cast<double>(size) / static_cast<double>(cap));
        wire += freq * frags * static_cast<double>(fragment_size);
        data += freq * static_cast<double>(size);
    }
    if (data <= 0.0) throw std::runtime_error("fragmentation_overhead: empty histogram");
    return wire / data;
}

size_t optimal_fragment_size(const SizeHistogram& hist, size_t lo, size_t hi) {
    if (lo < kFragmentHeaderSize + 1)
        throw std::runtime_error("optimal_fragment_size: lo must be at least 36");
    if (hi < lo) throw std::runtime_error("optimal_fragment_size: empty range");
    if (hist.empty()) throw std::runtime_error("optimal_fragment_size: empty histogram");
    size_t best = lo;
    double best_overhead = fragmentation_overhead(hist, lo);
    for (size_t ell = lo + 1; ell <= hi; ell++) {
        double o = fragmentation_overhead(hist, ell);
        if (o < best_overhead) {  // strict: ties keep the smaller size
            best_overhead = o;
            best = ell;
        }
    }
    return best;
}

}  // namespace codecast
