#include "temg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "temg/common.hpp"
#include "temg/csv.hpp"
#include "temg/rng.hpp"

namespace temg {

uint32_t TemporalGraph::intern(const std::string& address) {
  auto it = id_of.find(address);
  if (it != id_of.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(addresses.size());
  addresses.push_back(address);
  id_of.emplace(address, id);
  return id;
}

void TemporalGraph::finalize_edges() {
  // stable sort keeps file order among equal timestamps
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Transaction& a, const Transaction& b) {
                     return a.time < b.time;
                   });
  for (size_t i = 0; i < edges.size(); ++i) edges[i].index = i;
  labels.assign(num_nodes(), -1);
}

TemporalGraph load_graph(const std::string& tx_path, const CsvSchema& schema,
                         LoadReport* report) {
  CsvTable t = read_csv(tx_path);
  int c_src = t.column(schema.src), c_dst = t.column(schema.dst);
  int c_time = t.column(schema.time), c_amount = t.column(schema.amount);
  if (c_src < 0 || c_dst < 0 || c_time < 0 || c_amount < 0)
    throw IoError("transaction csv " + tx_path + " is missing one of columns: " +
                  schema.src + "," + schema.dst + "," + schema.time + "," +
                  schema.amount);
  TemporalGraph g;
  LoadReport rep;
  size_t needed = static_cast<size_t>(
      std::max(std::max(c_src, c_dst), std::max(c_time, c_amount)) + 1);
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::string where = "row " + std::to_string(r + 2);  // 1-based, after header
    if (row.size() < needed)
      throw IoError("malformed " + where + ": expected at least " +
                    std::to_string(needed) + " fields, got " +
                    std::to_string(row.size()));
    rep.rows++;
    int64_t time = parse_i64(row[c_time], where + ", column " + schema.time);
    if (time < 0)
      throw IoError("negative timestamp at " + where);
    double amount = parse_f64(row[c_amount], where + ", column " + schema.amount);
    if (!std::isfinite(amount) || amount < 0.0)
      throw IoError("negative or non-finite amount at " + where);
    const std::string& src = row[c_src];
    const std::string& dst = row[c_dst];
    if (src.empty() || dst.empty())
      throw IoError("empty address at " + where);
    if (src == dst) {
      rep.self_transfers++;
      continue;
    }
    Transaction e;
    e.src = g.intern(src);
    e.dst = g.intern(dst);
    e.time = time;
    e.amount = amount;
    g.edges.push_back(e);
  }
  g.finalize_edges();
  if (report) {
    report->rows = rep.rows;
    report->self_transfers = rep.self_transfers;
  }
  return g;
}

void attach_labels(TemporalGraph& g, const std::string& label_path,
                   LoadReport* report) {
  CsvTable t = read_csv(label_path);
  int c_addr = t.column("address"), c_label = t.column("label");
  if (c_addr < 0 || c_label < 0)
    throw IoError("label csv " + label_path + " must have columns address,label");
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::string where = "row " + std::to_string(r + 2);
    if (row.size() <= static_cast<size_t>(std::max(c_addr, c_label)))
      throw IoError("malformed label " + where);
    int64_t v = parse_i64(row[c_label], where + ", column label");
    if (v != 0 && v != 1)
      throw IoError("label must be 0 or 1 at " + where);
    if (report) report->label_rows++;
    auto it = g.id_of.find(row[c_addr]);
    if (it == g.id_of.end()) {
      if (report) report->labels_unknown_address++;
      continue;
    }
    g.labels[it->second] = static_cast<int8_t>(v);
  }
}

Matrix base_features_raw(const TemporalGraph& g) {
  const size_t n = g.num_nodes();
  Matrix f(n, kBaseFeatureDim);
  std::vector<double> in_amt(n, 0.0), out_amt(n, 0.0);
  std::vector<uint64_t> in_deg(n, 0), out_deg(n, 0);
  std::vector<int64_t> t_min(n, std::numeric_limits<int64_t>::max());
  std::vector<int64_t> t_max(n, std::numeric_limits<int64_t>::min());
  std::vector<std::vector<uint32_t>> in_nbrs(n), out_nbrs(n);
  for (const auto& e : g.edges) {
    out_deg[e.src]++;
    in_deg[e.dst]++;
    out_amt[e.src] += e.amount;
    in_amt[e.dst] += e.amount;
    out_nbrs[e.src].push_back(e.dst);
    in_nbrs[e.dst].push_back(e.src);
    for (uint32_t v : {e.src, e.dst}) {
      t_min[v] = std::min(t_min[v], e.time);
      t_max[v] = std::max(t_max[v], e.time);
    }
  }
  auto distinct = [](std::vector<uint32_t>& v) {
    std::sort(v.begin(), v.end());
    return static_cast<double>(std::unique(v.begin(), v.end()) - v.begin());
  };
  for (size_t v = 0; v < n; ++v) {
    double span = t_max[v] >= t_min[v] ? static_cast<double>(t_max[v] - t_min[v]) : 0.0;
    f(v, 0) = static_cast<double>(in_deg[v]);
    f(v, 1) = static_cast<double>(out_deg[v]);
    f(v, 2) = distinct(in_nbrs[v]);
    f(v, 3) = distinct(out_nbrs[v]);
    f(v, 4) = std::log1p(in_amt[v]);
    f(v, 5) = std::log1p(out_amt[v]);
    f(v, 6) = std::log1p(span);
    f(v, 7) = std::log1p(static_cast<double>(in_deg[v] + out_deg[v]));
  }
  return f;
}

void standardize_columns(Matrix& m) {
  const size_t n = m.rows();
  if (n == 0) return;
  for (size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += m(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double d = m(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);  // population variance
    if (var > 0.0) {
      double inv = 1.0 / std::sqrt(var);
      for (size_t i = 0; i < n; ++i) m(i, j) = (m(i, j) - mean) * inv;
    } else {
      for (size_t i = 0; i < n; ++i) m(i, j) = 0.0;
    }
  }
}

void attach_base_features(TemporalGraph& g) {
  g.features = base_features_raw(g);
  standardize_columns(g.features);
}

void attach_features_from_csv(TemporalGraph& g, const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.empty() || t.header[0] != "address")
    throw IoError("feature csv " + path + " must start with column address");
  size_t d = t.header.size() - 1;
  if (d == 0) throw IoError("feature csv " + path + " has no feature columns");
  Matrix f(g.num_nodes(), d);
  std::vector<bool> seen(g.num_nodes(), false);
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::string where = "row " + std::to_string(r + 2);
    if (row.size() != t.header.size())
      throw IoError("malformed feature " + where);
    auto it = g.id_of.find(row[0]);
    if (it == g.id_of.end()) continue;  // extra addresses are harmless
    for (size_t j = 0; j < d; ++j)
      f(it->second, j) = parse_f64(row[j + 1], where + ", column f" + std::to_string(j));
    seen[it->second] = true;
  }
  for (size_t v = 0; v < g.num_nodes(); ++v)
    if (!seen[v])
      throw IoError("feature csv " + path + " is missing address " + g.addresses[v]);
  g.features = std::move(f);
}

DataSplit chronological_split(const TemporalGraph& g,
                              std::array<double, 3> ratios) {
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratios[0] > 0 && ratios[1] > 0 && ratios[2] > 0) ||
      std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split ratios must be positive and sum to 1");
  std::vector<int64_t> activation(g.num_nodes(),
                                  std::numeric_limits<int64_t>::max());
  for (const auto& e : g.edges) {  // edges sorted: first touch = activation
    for (uint32_t v : {e.src, e.dst})
      if (activation[v] == std::numeric_limits<int64_t>::max())
        activation[v] = e.time;
  }
  std::vector<uint32_t> nodes;
  for (uint32_t v = 0; v < g.num_nodes(); ++v)
    if (g.labels[v] >= 0) nodes.push_back(v);
  if (nodes.size() < 5)
    throw ConfigError("chronological split needs at least 5 labeled nodes, got " +
                      std::to_string(nodes.size()));
  std::stable_sort(nodes.begin(), nodes.end(), [&](uint32_t a, uint32_t b) {
    if (activation[a] != activation[b]) return activation[a] < activation[b];
    return a < b;
  });
  size_t n = nodes.size();
  size_t c1 = static_cast<size_t>(std::floor(ratios[0] * static_cast<double>(n)));
  size_t c2 = static_cast<size_t>(
      std::floor((ratios[0] + ratios[1]) * static_cast<double>(n)));
  DataSplit s;
  s.train.assign(nodes.begin(), nodes.begin() + c1);
  s.val.assign(nodes.begin() + c1, nodes.begin() + c2);
  s.test.assign(nodes.begin() + c2, nodes.end());
  return s;
}

MessageGraph MessageGraph::from_pairs(
    size_t n, std::vector<std::pair<uint32_t, uint32_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  MessageGraph mg;
  mg.n = n;
  mg.pairs = pairs;
  std::vector<std::vector<uint32_t>> adj(n);
  for (auto [u, v] : pairs) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  mg.row_ptr.assign(n + 1, 0);
  mg.nbr_ptr.assign(n + 1, 0);
  for (size_t v = 0; v < n; ++v) {
    mg.row_ptr[v + 1] = mg.row_ptr[v] + adj[v].size() + 1;  // + self
    mg.nbr_ptr[v + 1] = mg.nbr_ptr[v] + adj[v].size();
  }
  mg.col.resize(mg.row_ptr[n]);
  mg.weight.resize(mg.row_ptr[n]);
  mg.nbr.resize(mg.nbr_ptr[n]);
  std::vector<double> inv_sqrt_deg(n);
  for (size_t v = 0; v < n; ++v)
    inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(adj[v].size() + 1));
  for (size_t v = 0; v < n; ++v) {
    size_t p = mg.row_ptr[v];
    bool self_done = false;
    auto push = [&](uint32_t u) {
      mg.col[p] = u;
      mg.weight[p] = inv_sqrt_deg[v] * inv_sqrt_deg[u];
      ++p;
    };
    for (uint32_t u : adj[v]) {
      if (!self_done && u > static_cast<uint32_t>(v)) {
        push(static_cast<uint32_t>(v));
        self_done = true;
      }
      push(u);
    }
    if (!self_done) push(static_cast<uint32_t>(v));
    std::copy(adj[v].begin(), adj[v].end(), mg.nbr.begin() + mg.nbr_ptr[v]);
  }
  return mg;
}

MessageGraph MessageGraph::build(const TemporalGraph& g) {
  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  pairs.reserve(g.edges.size());
  for (const auto& e : g.edges)
    pairs.emplace_back(std::min(e.src, e.dst), std::max(e.src, e.dst));
  return from_pairs(g.num_nodes(), std::move(pairs));
}

MessageGraph MessageGraph::drop_edges(double p, uint64_t seed) const {
  if (p < 0.0 || p >= 1.0) throw ConfigError("edge drop probability must be in [0,1)");
  Rng rng(mix64(seed, 0xD50BA11ULL));
  std::vector<std::pair<uint32_t, uint32_t>> kept;
  kept.reserve(pairs.size());
  for (const auto& pr : pairs)
    if (rng.uniform() >= p) kept.push_back(pr);
  return from_pairs(n, std::move(kept));
}

void write_transactions_csv(const TemporalGraph& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write transactions csv: " + path);
  os << "src,dst,time,amount\n";
  char buf[64];
  for (const auto& e : g.edges) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.amount);
    os << g.addresses[e.src] << "," << g.addresses[e.dst] << "," << e.time
       << "," << buf << "\n";
  }
  if (!os) throw IoError("write failure on transactions csv: " + path);
}

void write_labels_csv(const TemporalGraph& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write labels csv: " + path);
  os << "address,label\n";
  for (size_t v = 0; v < g.num_nodes(); ++v)
    if (g.labels[v] >= 0)
      os << g.addresses[v] << "," << int(g.labels[v]) << "\n";
  if (!os) throw IoError("write failure on labels csv: " + path);
}

namespace {

constexpr char kGraphMagic[4] = {'T', 'E', 'M', 'G'};
constexpr uint16_t kGraphVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated graph cache");
  return v;
}

void put_string(std::ofstream& os, const std::string& s) {
  put<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& is) {
  uint32_t len = get<uint32_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw IoError("truncated graph cache");
  return s;
}

}  // namespace

void write_graph_cache(const TemporalGraph& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write graph cache: " + path);
  os.write(kGraphMagic, 4);
  put<uint16_t>(os, kGraphVersion);
  put<uint64_t>(os, g.num_nodes());
  put<uint64_t>(os, g.edges.size());
  put<uint64_t>(os, g.features.rows());
  put<uint64_t>(os, g.features.cols());
  for (const auto& a : g.addresses) put_string(os, a);
  os.write(reinterpret_cast<const char*>(g.labels.data()),
           static_cast<std::streamsize>(g.labels.size()));
  for (const auto& e : g.edges) {
    put<uint32_t>(os, e.src);
    put<uint32_t>(os, e.dst);
    put<int64_t>(os, e.time);
    put<double>(os, e.amount);
    put<uint64_t>(os, e.index);
  }
  os.write(reinterpret_cast<const char*>(g.features.data()),
           static_cast<std::streamsize>(g.features.size() * sizeof(double)));
  if (!os) throw IoError("write failure on graph cache: " + path);
}

TemporalGraph read_graph_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open graph cache: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kGraphMagic, 4) != 0)
    throw IoError("bad magic in graph cache: " + path);
  uint16_t version = get<uint16_t>(is);
  if (version != kGraphVersion)
    throw IoError("unsupported graph cache version " + std::to_string(version));
  uint64_t n = get<uint64_t>(is);
  uint64_t m = get<uint64_t>(is);
  uint64_t fr = get<uint64_t>(is);
  uint64_t fc = get<uint64_t>(is);
  TemporalGraph g;
  g.addresses.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    std::string a = get_string(is);
    g.id_of.emplace(a, static_cast<uint32_t>(i));
    g.addresses.push_back(std::move(a));
  }
  g.labels.resize(n);
  is.read(reinterpret_cast<char*>(g.labels.data()),
          static_cast<std::streamsize>(n));
  g.edges.resize(m);
  for (auto& e : g.edges) {
    e.src = get<uint32_t>(is);
    e.dst = get<uint32_t>(is);
    e.time = get<int64_t>(is);
    e.amount = get<double>(is);
    e.index = get<uint64_t>(is);
  }
  g.features = Matrix(fr, fc);
  is.read(reinterpret_cast<char*>(g.features.data()),
          static_cast<std::streamsize>(fr * fc * sizeof(double)));
  if (!is) throw IoError("truncated graph cache: " + path);
  return g;
}

}  // namespace temg
