#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "temg/common.hpp"
#include "temg/graph.hpp"
#include "temg/types.hpp"

namespace temg::test {

// Fresh scratch directory under the system temp dir; wiped on construction
// so reruns start clean.
inline std::string scratch_dir(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "temg_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

// Builds a finalized graph from (src, dst, time, amount) tuples with
// synthetic addresses "n<id>".
inline TemporalGraph make_graph(
    const std::vector<std::tuple<uint32_t, uint32_t, int64_t, double>>& rows,
    size_t n_nodes) {
  TemporalGraph g;
  for (size_t i = 0; i < n_nodes; ++i) g.intern("n" + std::to_string(i));
  for (const auto& [s, d, t, a] : rows) {
    Transaction e;
    e.src = s;
    e.dst = d;
    e.time = t;
    e.amount = a;
    e.index = g.edges.size();
    g.edges.push_back(e);
  }
  g.finalize_edges();
  return g;
}

}  // namespace temg::test
