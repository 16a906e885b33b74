#pragma once

#include "falsify/glis/problem.hpp"
#include "falsify/glis/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace falsify::glis {

/// Added to the objective of an infeasible point: scale * (violation + 1).
inline constexpr double kInfeasiblePenalty = 1e3;

struct PsoResult
{
  Vector x;
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

/// Global-best particle swarm with constriction coefficients. Particles stay
/// inside the box; points outside the feasible set are penalized. `initial`
/// positions, if given, replace the first random particles (warm starts).
inline PsoResult pso_search(const std::function<double(VectorView)> & objective,
                            const OptProblem & problem, const PsoConfig & config, Rng & rng,
                            std::span<const Vector> initial = {})
{
  config.validate();
  const std::size_t n = problem.dim();
  const auto swarm = static_cast<std::size_t>(config.swarm_size);

  Vector vmax(n);
  for (std::size_t d = 0; d < n; ++d) {
    vmax[d] = config.velocity_clamp * (problem.upper[d] - problem.lower[d]);
  }

  auto penalized = [&](const Vector & x) {
    double value = objective(x);
    if (!std::isfinite(value)) {
      value = std::numeric_limits<double>::max();
    }
    if (!problem.is_feasible(x)) {
      value += kInfeasiblePenalty * (problem.constraint_violation(x) + 1.0);
    }
    return value;
  };

  std::vector<Vector> pos(swarm, Vector(n));
  std::vector<Vector> vel(swarm, Vector(n));
  for (std::size_t p = 0; p < swarm; ++p) {
    for (std::size_t d = 0; d < n; ++d) {
      if (p < initial.size()) {
        pos[p][d] = std::clamp(initial[p][d], problem.lower[d], problem.upper[d]);
      } else {
        pos[p][d] = rng.uniform(problem.lower[d], problem.upper[d]);
      }
      vel[p][d] = rng.uniform(-vmax[d], vmax[d]);
    }
  }

  std::vector<Vector> best_pos = pos;
  std::vector<double> best_val(swarm);
  std::size_t g = 0;
  for (std::size_t p = 0; p < swarm; ++p) {
    best_val[p] = penalized(pos[p]);
    if (best_val[p] < best_val[g]) {
      g = p;
    }
  }

  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t p = 0; p < swarm; ++p) {
      for (std::size_t d = 0; d < n; ++d) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = config.inertia * vel[p][d] +
                   config.cognitive * r1 * (best_pos[p][d] - pos[p][d]) +
                   config.social * r2 * (best_pos[g][d] - pos[p][d]);
        v = std::clamp(v, -vmax[d], vmax[d]);
        vel[p][d] = v;
        pos[p][d] = std::clamp(pos[p][d] + v, problem.lower[d], problem.upper[d]);
      }
      const double value = penalized(pos[p]);
      if (value < best_val[p]) {
        best_val[p] = value;
        best_pos[p] = pos[p];
      }
    }
    for (std::size_t p = 0; p < swarm; ++p) {
      if (best_val[p] < best_val[g]) {
        g = p;
      }
    }
  }

  PsoResult result;
  result.x = best_pos[g];
  result.value = best_val[g];
  result.feasible = problem.is_feasible(result.x);
  return result;
}

/// Best in-box point found by the swarm.
inline Vector pso_minimize(const std::function<double(VectorView)> & objective,
                           const OptProblem & problem, const PsoConfig & config, Rng & rng)
{
  return pso_search(objective, problem, config, rng).x;
}

}  // namespace falsify::glis
