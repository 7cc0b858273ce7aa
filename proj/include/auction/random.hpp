#pragma once

#include <cstdint>
#include <random>

#include "auction/types.hpp"

namespace auction {

using Rng = std::mt19937_64;

// Uniform in [0, 1).  Implemented directly so draws are identical across
// standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool flip(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

// Samples an index proportional to non-negative weights by CDF walk.
// The last positive weight absorbs rounding slack.
template <typename Derived>
int sample_index(Rng& rng, const Eigen::MatrixBase<Derived>& weights) {
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) total += weights[i];
  double u = uniform01(rng) * total;
  int last_positive = -1;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return last_positive;
}

}  // namespace auction
