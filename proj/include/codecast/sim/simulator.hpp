#pragma once

#include "codecast/sim/config.hpp"
#include "codecast/sim/metrics.hpp"
#include "codecast/sim/topology.hpp"

namespace codecast::sim {

// Runs one experiment to completion and returns the metrics report.
// Dispatches on cfg.scheme.  Fully deterministic for a fixed config.
MetricsReport run_experiment(const ExperimentConfig& cfg);

// Same, but over a caller-supplied topology (delays already assigned).
MetricsReport run_experiment_on(const ExperimentConfig& cfg, const Topology& topo);

// Builds the topology an experiment would use (generated or loaded).
Topology build_topology(const ExperimentConfig& cfg);

}  // namespace codecast::sim
