#pragma once

#include "falsify/glis/problem.hpp"

#include <cmath>
#include <numbers>
#include <span>

namespace falsify::glis {

/// Inverse-distance-weighting exploration term
///   z(x) = (2/pi) * atan(1 / sum_i w_i(x)),  w_i = exp(-d_i^2) / d_i^2,
/// which is 0 at sampled points and approaches 1 far away from them.
inline double idw_exploration(VectorView x, std::span<const Sample> samples)
{
  double weight_sum = 0.0;
  for (const Sample & s : samples) {
    const double d2 = squared_distance(x, s.x);
    if (d2 == 0.0) {
      return 0.0;
    }
    weight_sum += std::exp(-d2) / d2;
  }
  return 2.0 / std::numbers::pi * std::atan(1.0 / weight_sum);
}

}  // namespace falsify::glis
