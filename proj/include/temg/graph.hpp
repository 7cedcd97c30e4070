#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "temg/matrix.hpp"
#include "temg/types.hpp"

namespace temg {

// Column names of the transaction CSV; remappable for foreign exports.
struct CsvSchema {
  std::string src = "src";
  std::string dst = "dst";
  std::string time = "time";
  std::string amount = "amount";
};

struct LoadReport {
  size_t rows = 0;            // data rows in the transaction file
  size_t self_transfers = 0;  // dropped src == dst rows
  size_t label_rows = 0;
  size_t labels_unknown_address = 0;  // label rows whose address never transacts
};

// Directed temporal multigraph with interned addresses, a time-sorted edge
// stream, optional {0,1} node labels (-1 = unlabeled) and node features.
struct TemporalGraph {
  std::vector<std::string> addresses;            // dense id -> address
  std::unordered_map<std::string, uint32_t> id_of;
  std::vector<Transaction> edges;                // sorted by (time, index)
  std::vector<int8_t> labels;                    // -1 / 0 / 1
  Matrix features;                               // N x d_in, may be empty

  size_t num_nodes() const { return addresses.size(); }

  uint32_t intern(const std::string& address);
  // Sorts by (time, file order) and assigns index = sorted ordinal.
  void finalize_edges();
};

TemporalGraph load_graph(const std::string& tx_path, const CsvSchema& schema,
                         LoadReport* report);

// label CSV: header "address,label", label in {0,1}. Unknown addresses are
// skipped and counted in the report.
void attach_labels(TemporalGraph& g, const std::string& label_path,
                   LoadReport* report);

constexpr int kBaseFeatureDim = 8;

// Engineered per-node features, unstandardized:
//   in-degree, out-degree, distinct in-neighbors, distinct out-neighbors,
//   log1p(total in amount), log1p(total out amount),
//   log1p(active span seconds), log1p(transaction count).
Matrix base_features_raw(const TemporalGraph& g);

// In-place column standardization with population sigma; zero-variance
// columns become all-zero.
void standardize_columns(Matrix& m);

// base_features_raw + standardize_columns, stored on the graph.
void attach_base_features(TemporalGraph& g);

// Feature override CSV: header "address,f0,...,f{d-1}". Every graph address
// must be present; values are used as-is.
void attach_features_from_csv(TemporalGraph& g, const std::string& path);

struct DataSplit {
  std::vector<uint32_t> train, val, test;
};

// Chronological split of labeled nodes keyed by activation time (timestamp
// of the first incident transaction, ties by node id). Cut points floor the
// cumulative ratios, so the remainder lands in the earlier parts.
DataSplit chronological_split(const TemporalGraph& g,
                              std::array<double, 3> ratios = {0.6, 0.2, 0.2});

// Undirected message structure used by the node classifier: deduplicated
// node pairs plus a self-loop on every node, with symmetric normalization
// coefficients 1/sqrt(deg_u * deg_v) where deg counts the self-loop.
struct MessageGraph {
  size_t n = 0;
  std::vector<std::pair<uint32_t, uint32_t>> pairs;  // dedup, u < v

  // CSR over columns sorted ascending, self-loop included.
  std::vector<size_t> row_ptr;
  std::vector<uint32_t> col;
  std::vector<double> weight;

  // neighbor lists without self-loops, sorted; for mean aggregation
  std::vector<size_t> nbr_ptr;
  std::vector<uint32_t> nbr;

  static MessageGraph build(const TemporalGraph& g);
  static MessageGraph from_pairs(size_t n,
                                 std::vector<std::pair<uint32_t, uint32_t>> pairs);

  // Independently drops undirected pairs with probability p (self-loops are
  // kept by construction). Deterministic in `seed`.
  MessageGraph drop_edges(double p, uint64_t seed) const;
};

// Versioned binary snapshot of a loaded graph (addresses, labels, edges,
// features). Round-trips bit-exactly.
void write_graph_cache(const TemporalGraph& g, const std::string& path);
TemporalGraph read_graph_cache(const std::string& path);

// CSV writers for generated data; amounts use round-trip precision so a
// write/load cycle reproduces the stream exactly.
void write_transactions_csv(const TemporalGraph& g, const std::string& path);
void write_labels_csv(const TemporalGraph& g, const std::string& path);

}  // namespace temg
