#pragma once

#include "falsify/error.hpp"
#include "falsify/glis/problem.hpp"
#include "falsify/glis/rng.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace falsify::glis {

inline constexpr int kMaxConsecutiveRejections = 10000;

namespace detail {

inline double lhs_coordinate(const OptProblem & problem, std::size_t d, std::size_t stratum,
                             std::size_t count, Rng & rng)
{
  const double width = problem.upper[d] - problem.lower[d];
  const double u = (static_cast<double>(stratum) + rng.uniform()) / static_cast<double>(count);
  return std::min(problem.lower[d] + u * width, problem.upper[d]);
}

}  // namespace detail

/// Latin hypercube design of `count` points: in every dimension each of the
/// `count` equal-width strata holds exactly one point. Infeasible points are
/// redrawn inside their cell; when that keeps failing, the point trades its
/// stratum in a random dimension with another point, which keeps the design
/// stratified. Constraints can make a stratified design impossible (a top
/// stratum with no feasible partner); points left infeasible after the swap
/// search are redrawn uniformly over the box.
inline std::vector<Vector> lhs_sample(int count, const OptProblem & problem, Rng & rng)
{
  if (count < 1) {
    throw Error("invalid-argument", "lhs_sample needs count >= 1");
  }
  problem.validate();
  const std::size_t n = problem.dim();
  const auto m = static_cast<std::size_t>(count);

  // strata[d][j] = stratum of point j along dimension d
  std::vector<std::vector<std::size_t>> strata(n, std::vector<std::size_t>(m));
  for (auto & perm : strata) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t j = m; j > 1; --j) {
      std::swap(perm[j - 1], perm[rng.index(j)]);
    }
  }

  std::vector<Vector> points(m, Vector(n));
  auto draw = [&](std::size_t j) {
    for (std::size_t d = 0; d < n; ++d) {
      points[j][d] = detail::lhs_coordinate(problem, d, strata[d][j], m, rng);
    }
  };
  for (std::size_t j = 0; j < m; ++j) {
    draw(j);
  }
  if (!problem.feasible) {
    return points;
  }

  constexpr int kCellRedraws = 20;
  constexpr int kSwapAttempts = 2000;
  // Redraws point j inside its current cell until feasible (bounded).
  auto settle = [&](std::size_t j) {
    for (int t = 0; t < kCellRedraws; ++t) {
      if (problem.is_feasible(points[j])) {
        return true;
      }
      draw(j);
    }
    return problem.is_feasible(points[j]);
  };

  std::vector<std::size_t> infeasible;
  auto collect = [&] {
    infeasible.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (!settle(j)) {
        infeasible.push_back(j);
      }
    }
  };
  collect();

  // Local search over stratum assignments: exchange one stratum between two
  // points (at least one of them infeasible half of the time) and keep the
  // exchange unless it increases the number of infeasible points.
  std::vector<char> ok(m);
  for (std::size_t j = 0; j < m; ++j) {
    ok[j] = problem.is_feasible(points[j]) ? 1 : 0;
  }
  for (int attempt = 0; attempt < kSwapAttempts && !infeasible.empty() && m > 1; ++attempt) {
    const std::size_t j =
      rng.uniform() < 0.5 ? infeasible[rng.index(infeasible.size())] : rng.index(m);
    std::size_t other = rng.index(m - 1);
    if (other >= j) {
      ++other;
    }
    const std::size_t d = rng.index(n);
    const Vector saved_j = points[j];
    const Vector saved_other = points[other];
    std::swap(strata[d][j], strata[d][other]);
    draw(j);
    draw(other);
    const bool j_ok = settle(j);
    const bool other_ok = settle(other);
    const int before = (ok[j] ? 0 : 1) + (ok[other] ? 0 : 1);
    const int after = (j_ok ? 0 : 1) + (other_ok ? 0 : 1);
    if (after > before) {
      std::swap(strata[d][j], strata[d][other]);
      points[j] = saved_j;
      points[other] = saved_other;
      continue;
    }
    ok[j] = j_ok ? 1 : 0;
    ok[other] = other_ok ? 1 : 0;
    infeasible.clear();
    for (std::size_t k = 0; k < m; ++k) {
      if (!ok[k]) {
        infeasible.push_back(k);
      }
    }
  }

  // No stratified assignment found for these points: plain rejection sampling.
  for (const std::size_t j : infeasible) {
    int rejections = 0;
    while (!problem.is_feasible(points[j])) {
      if (++rejections >= kMaxConsecutiveRejections) {
        throw Error("infeasible-domain", "no feasible point found after " +
                                           std::to_string(kMaxConsecutiveRejections) +
                                           " consecutive rejections");
      }
      for (std::size_t d = 0; d < n; ++d) {
        points[j][d] = rng.uniform(problem.lower[d], problem.upper[d]);
      }
    }
  }
  return points;
}

/// One uniformly random feasible in-box point (a single-stratum design).
inline Vector random_feasible_point(const OptProblem & problem, Rng & rng)
{
  return lhs_sample(1, problem, rng).front();
}

}  // namespace falsify::glis
