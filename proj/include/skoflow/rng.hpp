#pragma once

#include <cstdint>
#include <random>

#include "skoflow/math.hpp"

namespace skoflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-path random stream.  Path i of an ensemble with seed s gets the stream
// derived from (s, i), so results do not depend on thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  static RngStream for_path(std::uint64_t seed, std::uint64_t path_index) {
    return RngStream(splitmix64(seed ^ splitmix64(path_index + 1)));
  }

  // Uniform on (0, 1), endpoints excluded.
  double uniform01() {
    const std::uint64_t r = eng_() >> 11;  // 53 bits
    double u = (static_cast<double>(r) + 0.5) * 0x1.0p-53;
    return u;
  }

  double normal() { return norm_quantile(uniform01()); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace skoflow
