#pragma once

#include "falsify/error.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace falsify::glis {

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

/// Box-bounded black-box minimization problem. The box is [lower, upper];
/// `feasible` and `violation` describe any further constraints on the box.
struct OptProblem
{
  Vector lower;
  Vector upper;
  /// Empty means every in-box point is feasible.
  std::function<bool(VectorView)> feasible;
  /// Optional violation magnitude (0 when feasible); used for PSO penalties.
  std::function<double(VectorView)> violation;
  std::function<double(VectorView)> objective;

  std::size_t dim() const { return lower.size(); }

  bool is_feasible(VectorView x) const { return !feasible || feasible(x); }

  double constraint_violation(VectorView x) const
  {
    if (is_feasible(x)) {
      return 0.0;
    }
    return violation ? std::max(0.0, violation(x)) : 0.0;
  }

  bool in_box(VectorView x) const
  {
    if (x.size() != dim()) {
      return false;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
        return false;
      }
    }
    return true;
  }

  void validate() const
  {
    if (lower.empty() || lower.size() != upper.size()) {
      throw Error("invalid-problem", "bounds must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
        throw Error("invalid-problem", "lower[" + std::to_string(i) + "] must be < upper");
      }
    }
  }
};

struct Sample
{
  Vector x;
  double f = 0.0;

  bool operator==(const Sample &) const = default;
};

/// Constriction-coefficient PSO settings.
struct PsoConfig
{
  int swarm_size = 30;
  int iterations = 200;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  /// Maximum particle speed as a fraction of the box width per dimension.
  double velocity_clamp = 0.2;

  bool operator==(const PsoConfig &) const = default;

  void validate() const
  {
    if (swarm_size < 2 || iterations < 1) {
      throw Error("invalid-config", "PSO needs swarm_size >= 2 and iterations >= 1");
    }
  }
};

inline std::vector<double> default_epsilon_grid() { return {0.1, 0.25, 0.5, 1.0, 2.0, 3.0}; }

struct GlisConfig
{
  int n_max = 50;
  int n_init = 13;
  double delta = 2.0;
  double epsilon0 = 1.0;
  std::uint64_t seed = 0;
  PsoConfig pso;
  std::vector<double> epsilon_grid = default_epsilon_grid();
  /// Run the search in coordinates scaled to [-1, 1]^n.
  bool scale_variables = true;

  /// Iteration (number of samples so far) at which epsilon is recalibrated.
  int recalibration_iteration() const { return n_init + (n_max - n_init) / 2; }

  void validate() const
  {
    if (n_init < 1 || n_max < 1 || n_init > n_max) {
      throw Error("invalid-config", "need 1 <= n_init <= n_max");
    }
    if (!(delta >= 0.0) || !(epsilon0 > 0.0)) {
      throw Error("invalid-config", "need delta >= 0 and epsilon0 > 0");
    }
    pso.validate();
  }
};

inline double squared_distance(VectorView a, VectorView b)
{
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

}  // namespace falsify::glis
