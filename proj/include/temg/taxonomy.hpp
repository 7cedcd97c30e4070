#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "temg/types.hpp"

namespace temg {

// A motif class is an ordered triple of directed edges over abstract roles
// {0,1,2}. Roles are assigned by first appearance while reading the edges in
// temporal order (src before dst), so the first edge is always (0,1) and a
// signature is fully described by its last two edges. Classes span exactly
// two or three roles; self-loop edges are excluded.
struct MotifSignature {
  // edges[j] = {src_role, dst_role}
  std::array<std::array<uint8_t, 2>, 3> edges;
  int node_count = 0;

  bool operator==(const MotifSignature& o) const {
    return edges == o.edges;
  }
};

constexpr int kMotifClasses = 36;
constexpr int kMotifRoles = 3;
constexpr int kMotifColumns = kMotifClasses * kMotifRoles;  // 108

class MotifTaxonomy {
 public:
  // Enumerates all classes in canonical (lexicographic signature byte) order.
  static MotifTaxonomy enumerate();

  const std::vector<MotifSignature>& classes() const { return classes_; }

  // Packed key for the last two edges of a relabeled triple:
  // ((s2*3 + d2)*3 + s3)*3 + d3, in [0, 81).
  static int pack_key(int s2, int d2, int s3, int d3) {
    return ((s2 * 3 + d2) * 3 + s3) * 3 + d3;
  }

  // Class index for a packed key, or -1 when the key encodes a self-loop.
  int lookup(int key) const { return lookup_[key]; }

  // Index of a signature in canonical order, or -1.
  int index_of(const MotifSignature& sig) const;

  std::string to_json() const;

 private:
  std::vector<MotifSignature> classes_;
  std::array<int8_t, 81> lookup_{};
};

// Result of relabeling a concrete edge triple: the matched class, how many
// distinct nodes it spans, and which concrete node plays each role.
struct CanonicalMatch {
  int motif = -1;  // -1: spans >3 nodes or contains a self-loop
  int node_count = 0;
  std::array<uint32_t, 3> nodes{};  // nodes[q] = node with role q
};

// Relabels three edges given in strict (time, index) order by first
// appearance and looks the signature up in the taxonomy. Total function:
// unmatched triples yield motif = -1.
CanonicalMatch canonicalize(const Transaction& e1, const Transaction& e2,
                            const Transaction& e3, const MotifTaxonomy& tax);

// Hot-path variant working on raw endpoints. Returns the packed key or -1,
// fills nodes[] / node_count on success.
inline int relabel_key(uint32_t s1, uint32_t d1, uint32_t s2, uint32_t d2,
                       uint32_t s3, uint32_t d3, uint32_t nodes[3],
                       int* node_count) {
  if (s1 == d1 || s2 == d2 || s3 == d3) return -1;
  nodes[0] = s1;
  nodes[1] = d1;
  int n = 2;
  auto role_of = [&](uint32_t v) -> int {
    if (v == nodes[0]) return 0;
    if (v == nodes[1]) return 1;
    if (n == 3) return v == nodes[2] ? 2 : -1;
    nodes[2] = v;
    n = 3;
    return 2;
  };
  int rs2 = role_of(s2);
  int rd2 = role_of(d2);
  if (rd2 < 0) return -1;
  int rs3 = role_of(s3);
  if (rs3 < 0) return -1;
  int rd3 = role_of(d3);
  if (rd3 < 0) return -1;
  *node_count = n;
  return MotifTaxonomy::pack_key(rs2, rd2, rs3, rd3);
}

}  // namespace temg
