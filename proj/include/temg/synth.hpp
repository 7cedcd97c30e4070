#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "temg/graph.hpp"

namespace temg {

// Synthetic transaction-stream generator: heavy-tailed background traffic
// with planted burst patterns around labeled nodes.
struct SynthConfig {
  int n_nodes = 400;
  int n_background_tx = 5000;
  double anomaly_fraction = 0.05;
  double fanout_mix = 0.5;      // fraction of planted patterns that distribute
  double shift_strength = 0.0;  // scales amounts and timing by (1 + shift)
  double base_gap = 60.0;       // mean background inter-arrival, seconds
  double burst_window = 300.0;  // span of one planted pattern, seconds
  uint64_t seed = 1;
};

void validate(const SynthConfig& cfg);

struct PatternInstance {
  std::string node;     // labeled address
  std::string kind;     // "fanout" or "aggregation"
  int64_t t_start = 0;
  int64_t t_end = 0;
  size_t n_edges = 0;   // planted edges including the funding / forward legs
};

struct SynthResult {
  TemporalGraph graph;  // labels set for every node; features not attached
  std::vector<PatternInstance> patterns;
};

SynthResult generate(const SynthConfig& cfg);

// Train/test pair from the same generator family: the train graph uses
// shift 0, the test graph applies cfg.shift_strength under a derived seed.
std::pair<SynthResult, SynthResult> shift_pair(const SynthConfig& cfg);

std::string patterns_to_json(const std::vector<PatternInstance>& patterns);

// Dense benchmark workload: `edges` transactions one second apart, grouped
// in blocks of `block` consecutive repeats of the same ordered pair cycling
// through `pairs` pairs. Every timestamp fits one large window, so unlimited
// history scans are maximally expensive while aggregation collapses each
// block to a single edge.
TemporalGraph burst_stress_graph(size_t edges, size_t pairs, size_t block,
                                 uint64_t seed);

}  // namespace temg
