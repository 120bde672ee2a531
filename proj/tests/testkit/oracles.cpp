#include "testkit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

#include "codecast/codec.hpp"

namespace testkit {

using codecast::Bytes;

std::map<uint32_t, Bytes> gf2_peel_solve(std::vector<Gf2Equation> eqs) {
    std::map<uint32_t, Bytes> solved;
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto& eq : eqs) {
            // Substitute everything already known.
            auto it = eq.vars.begin();
            while (it != eq.vars.end()) {
                auto s = solved.find(*it);
                if (s == solved.end()) {
                    ++it;
                    continue;
                }
                codecast::xor_into(eq.rhs, s->second);
                it = eq.vars.erase(it);
            }
            if (eq.vars.size() == 1) {
                solved.emplace(eq.vars[0], eq.rhs);
                eq.vars.clear();
                progress = true;
            }
        }
    }
    return solved;
}

double mimd_replay(double r0, double gamma, double alpha, double r_min, double r_max,
                   const std::string& ops) {
    double r = r0;
    for (char op : ops) {
        if (op == 's')
            r = std::max(r_min, r * (1.0 - alpha * gamma));
        else if (op == 'l')
            r = std::min(r_max, r * (1.0 + alpha));
        else
            throw std::runtime_error("mimd_replay: op must be 's' or 'l'");
    }
    return r;
}

std::vector<double> dijkstra(const codecast::sim::Topology& topo, uint32_t src) {
    const auto adj = topo.adjacency();
    std::vector<double> dist(topo.n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (auto [v, e] : adj[u]) {
            double nd = d + topo.edges[e].delay;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

double brute_fragment_overhead(const codecast::SizeHistogram& hist, size_t fragment_size) {
    long double wire = 0.0L, payload = 0.0L, weight = 0.0L;
    for (auto [size, freq] : hist) {
        Bytes tx(size, 0xab);
        auto frags = codecast::fragment_transaction(tx, fragment_size);
        size_t bytes = 0;
        for (const auto& f : frags) bytes += codecast::serialize_fragment(f, fragment_size).size();
        wire += static_cast<long double>(freq) * bytes;
        payload += static_cast<long double>(freq) * size;
        weight += freq;
    }
    if (weight <= 0.0L || payload <= 0.0L)
        throw std::runtime_error("brute_fragment_overhead: empty histogram");
    return static_cast<double>(wire / payload);
}

size_t brute_optimal_fragment_size(const codecast::SizeHistogram& hist, size_t lo, size_t hi) {
    size_t best = 0;
    double best_cost = 0.0;
    for (size_t f = lo; f <= hi; f++) {
        double cost = brute_fragment_overhead(hist, f);
        if (best == 0 || cost < best_cost) {
            best = f;
            best_cost = cost;
        }
    }
    return best;
}

std::pair<Bytes, Bytes> find_id_collision(const codecast::HashKey& key, uint32_t id_bytes,
                                          uint32_t payload_size, codecast::Rng& rng) {
    std::map<uint64_t, Bytes> seen;
    for (int attempts = 0; attempts < 1 << 20; attempts++) {
        Bytes p = rng.random_bytes(payload_size);
        uint64_t id = codecast::short_id(key, p, id_bytes);
        auto [it, fresh] = seen.emplace(id, p);
        if (!fresh && it->second != p) return {it->second, p};
    }
    throw std::runtime_error("find_id_collision: exhausted attempts");
}

std::vector<double> robust_soliton_reference(uint32_t k, double c, double delta) {
    if (k == 0) throw std::runtime_error("robust_soliton_reference: k must be positive");
    // rho(1) = 1/k, rho(i) = 1/(i(i-1)); tau(i) = S/(ik) for i < k/S,
    // tau(ceil(k/S)) = S*ln(S/delta)/k; S = c*ln(k/delta)*sqrt(k); beta
    // normalizes.  Straight-line, no shared code with the library.
    long double S = static_cast<long double>(c) *
                    std::log(static_cast<long double>(k) / delta) *
                    std::sqrt(static_cast<long double>(k));
    long double k_over_s = static_cast<long double>(k) / S;
    uint64_t spike = static_cast<uint64_t>(std::ceil(static_cast<double>(k_over_s)));
    std::vector<long double> w(k + 1, 0.0L);
    for (uint32_t i = 1; i <= k; i++) {
        long double rho = (i == 1) ? 1.0L / k : 1.0L / (static_cast<long double>(i) * (i - 1));
        long double tau = 0.0L;
        if (static_cast<long double>(i) < k_over_s)
            tau = S / (static_cast<long double>(i) * k);
        else if (i == spike)
            tau = S * std::log(S / delta) / k;
        w[i] = rho + tau;
    }
    long double beta = 0.0L;
    for (uint32_t i = 1; i <= k; i++) beta += w[i];
    std::vector<double> pmf(k);
    for (uint32_t i = 1; i <= k; i++) pmf[i - 1] = static_cast<double>(w[i] / beta);
    return pmf;
}

CmdResult run_command(const std::string& cmd) {
    CmdResult r;
    std::string full = cmd + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) throw std::runtime_error("run_command: popen failed");
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

}  // namespace testkit
