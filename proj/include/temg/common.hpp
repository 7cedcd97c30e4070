#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace temg {

// Error taxonomy mapped to process exit codes by the CLI:
//   IoError / ConfigError -> 2 (bad input or usage)
//   VerifyError           -> 3 (a self-check or oracle comparison failed)
//   anything else         -> 1 (internal error)
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerifyError : std::runtime_error {
  explicit VerifyError(const std::string& msg) : std::runtime_error(msg) {}
};

// 64-bit mix (splitmix64 finalizer); used to derive independent RNG streams
// from a base seed plus stream tags so results never depend on thread count
// or iteration order.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }
inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

}  // namespace temg
