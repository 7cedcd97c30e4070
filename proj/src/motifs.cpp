#include "temg/motifs.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "temg/common.hpp"
#include "temg/csv.hpp"
#include "temg/rng.hpp"

namespace temg {

void validate(const MotifMatchConfig& cfg) {
  if (cfg.window <= 0) throw ConfigError("motif window must be positive");
  if (cfg.edge_limit < 0) throw ConfigError("edge limit must be >= 1, or 0 for unlimited");
  if (cfg.aggregate_dt < 0) throw ConfigError("aggregation gap must be >= 0");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
}

std::vector<Transaction> aggregate_transactions(
    const std::vector<Transaction>& edges, int64_t dt) {
  if (dt <= 0) throw ConfigError("aggregation gap must be positive");
  std::vector<Transaction> out;
  out.reserve(edges.size());
  std::unordered_map<uint64_t, size_t> last;  // (src,dst) -> survivor position
  for (const auto& e : edges) {
    uint64_t key = (static_cast<uint64_t>(e.src) << 32) | e.dst;
    auto it = last.find(key);
    if (it != last.end() && e.time - out[it->second].time <= dt) {
      out[it->second].amount += e.amount;
    } else {
      last[key] = out.size();
      out.push_back(e);
    }
  }
  return out;
}

uint64_t CountMatrix::total() const {
  uint64_t s = 0;
  for (uint64_t v : c) s += v;
  return s;
}

namespace {

inline void try_count(const Transaction& e1, const Transaction& e2,
                      const Transaction& anchor, const MotifTaxonomy& tax,
                      uint64_t* counts) {
  uint32_t nodes[3];
  int node_count = 0;
  int key = relabel_key(e1.src, e1.dst, e2.src, e2.dst, anchor.src, anchor.dst,
                        nodes, &node_count);
  if (key < 0) return;
  int motif = tax.lookup(key);
  for (int q = 0; q < node_count; ++q)
    counts[static_cast<size_t>(nodes[q]) * kMotifColumns + motif * 3 + q]++;
}

// Window bounds per anchor over the (sorted) history stream:
// window_end[i] = #history strictly before anchor i in (time, index),
// window_begin[i] = first history position with time >= t_i - window.
void window_bounds(const std::vector<Transaction>& anchors,
                   const std::vector<Transaction>& hist, int64_t window,
                   std::vector<size_t>& begin_out, std::vector<size_t>& end_out) {
  begin_out.resize(anchors.size());
  end_out.resize(anchors.size());
  size_t a = 0, b = 0;
  for (size_t i = 0; i < anchors.size(); ++i) {
    const Transaction& r = anchors[i];
    while (b < hist.size() && before(hist[b], r)) ++b;
    while (a < b && hist[a].time < r.time - window) ++a;
    begin_out[i] = a;
    end_out[i] = b;
  }
}

}  // namespace

CountMatrix count_motifs(const TemporalGraph& g, const MotifMatchConfig& cfg,
                         const MotifTaxonomy& tax) {
  validate(cfg);
  const std::vector<Transaction>& orig = g.edges;
  std::vector<Transaction> agg;
  const std::vector<Transaction>* hist = &orig;
  if (cfg.aggregate_dt > 0) {
    agg = aggregate_transactions(orig, cfg.aggregate_dt);
    hist = &agg;
  }
  const std::vector<Transaction>& h = *hist;
  std::vector<size_t> lo, hi;
  window_bounds(orig, h, cfg.window, lo, hi);

  const size_t limit =
      cfg.edge_limit > 0 ? static_cast<size_t>(cfg.edge_limit) : SIZE_MAX;
  const size_t cells = g.num_nodes() * kMotifColumns;
  int nthreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

  // Private per-thread accumulators, merged by summation afterwards. Counts
  // are integers, so the merge is exact and independent of scheduling.
  std::vector<std::vector<uint64_t>> buf(
      static_cast<size_t>(nthreads), std::vector<uint64_t>(cells, 0));

#pragma omp parallel num_threads(nthreads)
  {
    uint64_t* counts = buf[static_cast<size_t>(omp_get_thread_num())].data();
#pragma omp for schedule(dynamic, 64)
    for (int64_t ii = 0; ii < static_cast<int64_t>(orig.size()); ++ii) {
      const size_t i = static_cast<size_t>(ii);
      size_t a = lo[i], b = hi[i];
      if (b - a < 2) continue;
      const Transaction& anchor = orig[i];
      if (!cfg.random_sampling) {
        if (b - a > limit) a = b - limit;
        for (size_t j = a; j + 1 < b; ++j)
          for (size_t m = j + 1; m < b; ++m)
            try_count(h[j], h[m], anchor, tax, counts);
      } else {
        // uniform sample of `limit` window positions, deterministic per anchor
        size_t take = std::min(limit, b - a);
        Rng rng(mix64(cfg.sample_seed, 0x5A3E11ULL, anchor.index));
        std::vector<size_t> pick = rng.sample_without_replacement(b - a, take);
        std::sort(pick.begin(), pick.end());
        for (size_t j = 0; j + 1 < pick.size(); ++j)
          for (size_t m = j + 1; m < pick.size(); ++m)
            try_count(h[a + pick[j]], h[a + pick[m]], anchor, tax, counts);
      }
    }
  }

  CountMatrix out(g.num_nodes());
  for (const auto& b : buf)
    for (size_t i = 0; i < cells; ++i) out.c[i] += b[i];
  return out;
}

CountMatrix count_motifs_serial(const TemporalGraph& g,
                                const MotifMatchConfig& cfg,
                                const MotifTaxonomy& tax) {
  validate(cfg);
  const std::vector<Transaction>& orig = g.edges;
  std::vector<Transaction> agg;
  const std::vector<Transaction>* hist = &orig;
  if (cfg.aggregate_dt > 0) {
    agg = aggregate_transactions(orig, cfg.aggregate_dt);
    hist = &agg;
  }
  const std::vector<Transaction>& h = *hist;
  const size_t limit =
      cfg.edge_limit > 0 ? static_cast<size_t>(cfg.edge_limit) : SIZE_MAX;
  CountMatrix out(g.num_nodes());

  for (const Transaction& anchor : orig) {
    // binary search for the first history edge not strictly before the anchor
    size_t b = static_cast<size_t>(
        std::lower_bound(h.begin(), h.end(), anchor,
                         [](const Transaction& x, const Transaction& r) {
                           return before(x, r);
                         }) -
        h.begin());
    size_t a = b;
    while (a > 0 && h[a - 1].time >= anchor.time - cfg.window) --a;
    if (b - a < 2) continue;
    if (!cfg.random_sampling) {
      if (b - a > limit) a = b - limit;
      for (size_t j = a; j + 1 < b; ++j)
        for (size_t m = j + 1; m < b; ++m)
          try_count(h[j], h[m], anchor, tax, out.c.data());
    } else {
      size_t take = std::min(limit, b - a);
      Rng rng(mix64(cfg.sample_seed, 0x5A3E11ULL, anchor.index));
      std::vector<size_t> pick = rng.sample_without_replacement(b - a, take);
      std::sort(pick.begin(), pick.end());
      for (size_t j = 0; j + 1 < pick.size(); ++j)
        for (size_t m = j + 1; m < pick.size(); ++m)
          try_count(h[a + pick[j]], h[a + pick[m]], anchor, tax, out.c.data());
    }
  }
  return out;
}

CountMatrix count_motifs_bruteforce(const TemporalGraph& g,
                                    const MotifMatchConfig& cfg,
                                    const MotifTaxonomy& tax) {
  validate(cfg);
  if (g.edges.size() > 2000)
    throw ConfigError("brute-force counter is guarded to <= 2000 edges, got " +
                      std::to_string(g.edges.size()));
  const std::vector<Transaction>& orig = g.edges;
  std::vector<Transaction> agg;
  const std::vector<Transaction>* hist = &orig;
  if (cfg.aggregate_dt > 0) {
    agg = aggregate_transactions(orig, cfg.aggregate_dt);
    hist = &agg;
  }
  const std::vector<Transaction>& h = *hist;
  CountMatrix out(g.num_nodes());
  for (const Transaction& anchor : orig)
    for (size_t m = 0; m < h.size(); ++m) {
      if (!before(h[m], anchor)) continue;
      for (size_t j = 0; j < m; ++j) {
        if (h[j].time < anchor.time - cfg.window) continue;
        CanonicalMatch cm = canonicalize(h[j], h[m], anchor, tax);
        if (cm.motif < 0) continue;
        for (int q = 0; q < cm.node_count; ++q)
          out.at(cm.nodes[q], static_cast<size_t>(cm.motif) * 3 + q)++;
      }
    }
  return out;
}

void write_counts_csv(const CountMatrix& counts, const TemporalGraph& g,
                      const std::string& path) {
  if (counts.n != g.num_nodes())
    throw ConfigError("count matrix does not match graph");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write counts csv: " + path);
  os << "address";
  for (int m = 0; m < kMotifClasses; ++m)
    for (int r = 0; r < kMotifRoles; ++r) os << ",m" << m << "_r" << r;
  os << "\n";
  for (size_t v = 0; v < counts.n; ++v) {
    os << g.addresses[v];
    const uint64_t* row = counts.row(v);
    for (int c = 0; c < kMotifColumns; ++c) os << "," << row[c];
    os << "\n";
  }
  if (!os) throw IoError("write failure on counts csv: " + path);
}

CountMatrix read_counts_csv(const std::string& path, const TemporalGraph& g) {
  CsvTable t = read_csv(path);
  if (t.header.size() != static_cast<size_t>(kMotifColumns) + 1 ||
      t.header[0] != "address")
    throw IoError("counts csv " + path + " must have 109 columns starting with address");
  for (int m = 0; m < kMotifClasses; ++m)
    for (int r = 0; r < kMotifRoles; ++r) {
      std::string want = "m" + std::to_string(m) + "_r" + std::to_string(r);
      if (t.header[static_cast<size_t>(m * 3 + r) + 1] != want)
        throw IoError("counts csv " + path + " has unexpected column order");
    }
  CountMatrix out(g.num_nodes());
  std::vector<bool> seen(g.num_nodes(), false);
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::string where = "row " + std::to_string(r + 2);
    if (row.size() != t.header.size())
      throw IoError("malformed counts " + where);
    auto it = g.id_of.find(row[0]);
    if (it == g.id_of.end())
      throw IoError("counts csv address not in graph at " + where);
    for (int c = 0; c < kMotifColumns; ++c) {
      int64_t v = parse_i64(row[static_cast<size_t>(c) + 1],
                            where + ", column " + t.header[static_cast<size_t>(c) + 1]);
      if (v < 0) throw IoError("negative count at " + where);
      out.at(it->second, static_cast<size_t>(c)) = static_cast<uint64_t>(v);
    }
    seen[it->second] = true;
  }
  for (size_t v = 0; v < g.num_nodes(); ++v)
    if (!seen[v]) throw IoError("counts csv " + path + " is missing address " + g.addresses[v]);
  return out;
}

}  // namespace temg
