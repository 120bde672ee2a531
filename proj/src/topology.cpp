#include "codecast/sim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace codecast::sim {

std::vector<std::vector<std::pair<uint32_t, uint32_t>>> Topology::adjacency() const {
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj(n);
    for (uint32_t i = 0; i < edges.size(); i++) {
        adj[edges[i].u].emplace_back(edges[i].v, i);
        adj[edges[i].v].emplace_back(edges[i].u, i);
    }
    return adj;
}

bool is_connected(const Topology& topo) {
    if (topo.n == 0) return false;
    auto adj = topo.adjacency();
    std::vector<char> seen(topo.n, 0);
    std::deque<uint32_t> frontier{0};
    seen[0] = 1;
    uint32_t visited = 1;
    while (!frontier.empty()) {
        uint32_t u = frontier.front();
        frontier.pop_front();
        for (auto [v, e] : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                visited++;
                frontier.push_back(v);
            }
        }
    }
    return visited == topo.n;
}

namespace {

uint64_t edge_key(uint32_t a, uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | b;
}

Topology circulant_base(uint32_t n, uint32_t degree) {
    Topology topo;
    topo.n = n;
    for (uint32_t j = 1; j <= degree / 2; j++)
        for (uint32_t i = 0; i < n; i++) topo.edges.push_back({i, (i + j) % n, 0.0});
    if (degree % 2 == 1)
        for (uint32_t i = 0; i < n / 2; i++) topo.edges.push_back({i, i + n / 2, 0.0});
    return topo;
}

}  // namespace

Topology random_regular(uint32_t n, uint32_t degree, Rng& rng) {
    if (degree == 0 || n < 2) throw std::runtime_error("random_regular: need n >= 2, degree >= 1");
    if (degree >= n) throw std::runtime_error("random_regular: degree must be below n");
    if ((static_cast<uint64_t>(n) * degree) % 2 != 0)
        throw std::runtime_error("random_regular: n * degree must be even");
    if (degree / 2 >= (n + 1) / 2)
        throw std::runtime_error("random_regular: degree too large for circulant base");

    for (int attempt = 0; attempt < 100; attempt++) {
        Topology topo = circulant_base(n, degree);
        std::set<uint64_t> present;
        for (const auto& e : topo.edges) present.insert(edge_key(e.u, e.v));

        // Double-edge swaps keep every node's degree fixed while mixing the
        // edge set; rejected proposals (loops or parallels) are skipped.
        size_t swaps = 20 * topo.edges.size();
        for (size_t s = 0; s < swaps; s++) {
            size_t i = rng.uniform_index(topo.edges.size());
            size_t j = rng.uniform_index(topo.edges.size());
            if (i == j) continue;
            auto& e1 = topo.edges[i];
            auto& e2 = topo.edges[j];
            uint32_t a = e1.u, b = e1.v, c = e2.u, d = e2.v;
            if (rng.uniform() < 0.5) std::swap(c, d);
            if (a == c || b == d) continue;
            if (present.count(edge_key(a, c)) || present.count(edge_key(b, d))) continue;
            present.erase(edge_key(a, b));
            present.erase(edge_key(c, d));
            present.insert(edge_key(a, c));
            present.insert(edge_key(b, d));
            e1 = {a, c, 0.0};
            e2 = {b, d, 0.0};
        }

        if (is_connected(topo)) return topo;
    }
    throw std::runtime_error("random_regular: failed to produce a connected graph");
}

void assign_lognormal_delays(Topology& topo, double mu_log_ms, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::runtime_error("assign_lognormal_delays: sigma must be >= 0");
    for (auto& e : topo.edges) {
        double ms = sigma == 0.0 ? std::exp(mu_log_ms) : rng.lognormal(mu_log_ms, sigma);
        e.delay = ms / 1000.0;
    }
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_topology: cannot open " + path);
    Topology topo;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_topology: empty file");
    topo.n = static_cast<uint32_t>(std::stoul(line));
    if (topo.n < 2) throw std::runtime_error("load_topology: need at least 2 nodes");
    size_t lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Topology::Edge e;
        double delay_ms;
        if (!(ss >> e.u >> e.v >> delay_ms))
            throw std::runtime_error("load_topology: bad edge at line " + std::to_string(lineno));
        if (e.u >= topo.n || e.v >= topo.n || e.u == e.v || delay_ms < 0.0)
            throw std::runtime_error("load_topology: invalid edge at line " +
                                     std::to_string(lineno));
        e.delay = delay_ms / 1000.0;
        topo.edges.push_back(e);
    }
    if (topo.edges.empty()) throw std::runtime_error("load_topology: no edges");
    return topo;
}

void save_topology(const Topology& topo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_topology: cannot open " + path);
    out << topo.n << "\n";
    char buf[128];
    for (const auto& e : topo.edges) {
        std::snprintf(buf, sizeof(buf), "%u %u %.6f\n", e.u, e.v, e.delay * 1000.0);
        out << buf;
    }
}

}  // namespace codecast::sim
