#pragma once

#include "pbf/types.hpp"

#include <cstdint>
#include <random>

namespace pbf {

/// Portable seeded generator: std::mt19937_64 (its output sequence is fixed
/// by the standard) with hand-rolled uniform and Box-Muller normal draws,
/// so generated data is bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec normal_vec(int n);
  Vec uniform_vec(int n, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pbf
