#include "temg/taxonomy.hpp"

#include <sstream>

#include "temg/common.hpp"

namespace temg {

MotifTaxonomy MotifTaxonomy::enumerate() {
  MotifTaxonomy tax;
  tax.lookup_.fill(-1);
  // Keys iterate the last two role edges lexicographically, which is exactly
  // the canonical order of full signatures (the first edge is always (0,1)).
  // With roles 0 and 1 fixed by edge one, any placement of role 2 satisfies
  // first-appearance labeling, so the only invalid keys are self-loops.
  for (int s2 = 0; s2 < 3; ++s2)
    for (int d2 = 0; d2 < 3; ++d2)
      for (int s3 = 0; s3 < 3; ++s3)
        for (int d3 = 0; d3 < 3; ++d3) {
          if (s2 == d2 || s3 == d3) continue;
          MotifSignature sig;
          sig.edges = {{{0, 1},
                        {static_cast<uint8_t>(s2), static_cast<uint8_t>(d2)},
                        {static_cast<uint8_t>(s3), static_cast<uint8_t>(d3)}}};
          bool uses_third = s2 == 2 || d2 == 2 || s3 == 2 || d3 == 2;
          sig.node_count = uses_third ? 3 : 2;
          tax.lookup_[pack_key(s2, d2, s3, d3)] =
              static_cast<int8_t>(tax.classes_.size());
          tax.classes_.push_back(sig);
        }
  if (tax.classes_.size() != kMotifClasses)
    throw VerifyError("taxonomy enumeration produced " +
                      std::to_string(tax.classes_.size()) + " classes");
  return tax;
}

int MotifTaxonomy::index_of(const MotifSignature& sig) const {
  if (sig.edges[0][0] != 0 || sig.edges[0][1] != 1) return -1;
  for (auto e : sig.edges)
    if (e[0] > 2 || e[1] > 2 || e[0] == e[1]) return -1;
  return lookup_[pack_key(sig.edges[1][0], sig.edges[1][1], sig.edges[2][0],
                          sig.edges[2][1])];
}

std::string MotifTaxonomy::to_json() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < classes_.size(); ++i) {
    const auto& c = classes_[i];
    if (i) os << ",";
    os << "{\"index\":" << i << ",\"node_count\":" << c.node_count
       << ",\"edges\":[";
    for (int j = 0; j < 3; ++j) {
      if (j) os << ",";
      os << "[" << int(c.edges[j][0]) << "," << int(c.edges[j][1]) << "]";
    }
    os << "]}";
  }
  os << "]";
  return os.str();
}

CanonicalMatch canonicalize(const Transaction& e1, const Transaction& e2,
                            const Transaction& e3, const MotifTaxonomy& tax) {
  CanonicalMatch m;
  int key = relabel_key(e1.src, e1.dst, e2.src, e2.dst, e3.src, e3.dst,
                        m.nodes.data(), &m.node_count);
  if (key < 0) {
    m.node_count = 0;
    return m;
  }
  m.motif = tax.lookup(key);
  if (m.motif < 0) m.node_count = 0;
  return m;
}

}  // namespace temg
