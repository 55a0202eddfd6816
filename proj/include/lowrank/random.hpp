#pragma once

// xoshiro256** with splitmix64 seeding. Draws are bitwise reproducible across
// platforms, which the standard library distributions do not guarantee.

#include <cstdint>

#include "lowrank/specfun.hpp"

namespace lowrank {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Matrix of i.i.d. N(0, sd²) entries, filled column by column.
  Matrix normal_matrix(int rows, int cols, double sd = 1.0);
  Matrix uniform_matrix(int rows, int cols);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lowrank
