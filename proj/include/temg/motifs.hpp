#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temg/graph.hpp"
#include "temg/taxonomy.hpp"
#include "temg/types.hpp"

namespace temg {

// Matching configuration for the windowed triple counter.
struct MotifMatchConfig {
  int64_t window = 86400;     // seconds; history drawn from [t_i - window, t_i)
  int64_t edge_limit = 100;   // k most recent history edges; 0 = unlimited
  int64_t aggregate_dt = 0;   // merge same-pair edges closer than this; 0 = off
  bool random_sampling = false;  // sample history uniformly instead of most-recent
  uint64_t sample_seed = 1;
  int threads = 0;            // 0 = library default
};

void validate(const MotifMatchConfig& cfg);

// Greedy single-pass aggregation: an edge merges into the previous surviving
// edge with the same (src, dst) when their time gap is <= dt; the survivor
// keeps its (time, index) and accumulates amount. Output remains sorted.
std::vector<Transaction> aggregate_transactions(
    const std::vector<Transaction>& edges, int64_t dt);

// Per-node, per-(class, role) instance counts, row-major N x 108 with
// column = motif_index * 3 + role.
struct CountMatrix {
  size_t n = 0;
  std::vector<uint64_t> c;

  CountMatrix() = default;
  explicit CountMatrix(size_t nodes) : n(nodes), c(nodes * kMotifColumns, 0) {}

  uint64_t& at(size_t node, size_t col) { return c[node * kMotifColumns + col]; }
  uint64_t at(size_t node, size_t col) const { return c[node * kMotifColumns + col]; }
  const uint64_t* row(size_t node) const { return c.data() + node * kMotifColumns; }

  uint64_t total() const;
  bool operator==(const CountMatrix& o) const { return n == o.n && c == o.c; }
};

// Windowed 3-edge motif instance counting. Anchors iterate over the original
// stream; the history pool is drawn from the aggregated stream (when
// aggregation is enabled) restricted to [t_i - window, t_i), strictly before
// the anchor in (time, index) order, limited to the edge_limit most recent
// entries. Every history pair (in temporal order) plus the anchor that
// relabels to a taxonomy class increments the participating nodes' cells.
// OpenMP-parallel over anchors with per-thread accumulators; results are
// bit-identical for any thread count.
CountMatrix count_motifs(const TemporalGraph& g, const MotifMatchConfig& cfg,
                         const MotifTaxonomy& tax);

// Plain single-threaded reference with an independently structured scan;
// kept for kernel-equivalence tests and benchmarking.
CountMatrix count_motifs_serial(const TemporalGraph& g,
                                const MotifMatchConfig& cfg,
                                const MotifTaxonomy& tax);

// Exhaustive O(M^3) oracle: enumerates every (time, index)-increasing triple
// and applies the window test directly. Ignores edge_limit and sampling;
// aggregation is applied identically. Guarded to small inputs.
CountMatrix count_motifs_bruteforce(const TemporalGraph& g,
                                    const MotifMatchConfig& cfg,
                                    const MotifTaxonomy& tax);

// counts CSV: header "address,m0_r0,...,m35_r2" (109 columns).
void write_counts_csv(const CountMatrix& counts, const TemporalGraph& g,
                      const std::string& path);
CountMatrix read_counts_csv(const std::string& path, const TemporalGraph& g);

}  // namespace temg
