#pragma once

#include <cstdint>

namespace temg {

// One directed transfer. `index` is the ordinal position in the time-sorted
// stream; ties in `time` are broken by input file order, and the pair
// (time, index) is the strict temporal order used everywhere downstream.
struct Transaction {
  uint32_t src = 0;
  uint32_t dst = 0;
  int64_t time = 0;
  double amount = 0.0;
  uint64_t index = 0;

  bool operator==(const Transaction& o) const {
    return src == o.src && dst == o.dst && time == o.time &&
           amount == o.amount && index == o.index;
  }
};

// Strict (time, index) comparison.
inline bool before(const Transaction& a, const Transaction& b) {
  return a.time != b.time ? a.time < b.time : a.index < b.index;
}

}  // namespace temg
