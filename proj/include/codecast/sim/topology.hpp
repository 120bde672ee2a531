#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codecast/rng.hpp"

namespace codecast::sim {

// Undirected connected graph with symmetric per-edge propagation delays
// (seconds).  Nodes are 0..n-1.
struct Topology {
    uint32_t n = 0;
    struct Edge {
        uint32_t u = 0, v = 0;
        double delay = 0.0;
    };
    std::vector<Edge> edges;

    // adjacency()[u] lists (neighbor, edge index).
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adjacency() const;
};

bool is_connected(const Topology& topo);

// Connected random regular graph: a circulant base graph randomized by
// degree-preserving double-edge swaps, regenerated if a swap sequence
// disconnects it.  Throws std::runtime_error if n*degree is odd or
// degree >= n.
Topology random_regular(uint32_t n, uint32_t degree, Rng& rng);

// Draws each edge delay from exp(N(mu, sigma^2)) milliseconds, stored in
// seconds.  sigma == 0 gives the constant exp(mu).
void assign_lognormal_delays(Topology& topo, double mu_log_ms, double sigma, Rng& rng);

// Text format: first line "n", then one "u v delay_ms" line per edge.
Topology load_topology(const std::string& path);
void save_topology(const Topology& topo, const std::string& path);

}  // namespace codecast::sim
