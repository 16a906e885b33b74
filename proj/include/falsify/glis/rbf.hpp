#pragma once

#include "falsify/error.hpp"
#include "falsify/glis/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace falsify::glis {

/// Relative ridge (scaled by the mean diagonal) tried only when the plain
/// interpolation system cannot be solved. Multiquadric matrices are indefinite,
/// so a ridge can push a small negative eigenvalue towards zero; it is not the default.
inline constexpr double kRidge = 1e-8;
/// Floor for the objective range used by the acquisition function.
inline constexpr double kRangeFloor = 1e-12;

/// Extended precision for the interpolation system and surrogate sums. With
/// clustered centers the system reaches condition numbers around 1e15 and the
/// coefficients cancel; in double the centers are then no longer reproduced.
using Real = long double;

namespace detail {

inline Real squared_distance_ext(VectorView a, VectorView b)
{
  Real d = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Real t = static_cast<Real>(a[k]) - static_cast<Real>(b[k]);
    d += t * t;
  }
  return d;
}

/// Multiquadric basis phi(epsilon * r) = sqrt(1 + (epsilon * r)^2), from r^2.
inline Real multiquadric_ext(Real epsilon, Real squared_r)
{
  return std::sqrt(1.0L + epsilon * epsilon * squared_r);
}

}  // namespace detail

/// RBF interpolant sum_i coeffs[i] * phi(epsilon * ||x - centers[i]||).
struct Surrogate
{
  std::vector<Vector> centers;
  std::vector<Real> coeffs;
  double epsilon = 1.0;
  double f_min = 0.0;
  double f_max = 0.0;

  double operator()(VectorView x) const
  {
    Real value = 0.0L;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      value += coeffs[i] * detail::multiquadric_ext(epsilon, detail::squared_distance_ext(x, centers[i]));
    }
    return static_cast<double>(value);
  }

  /// f_max - f_min, floored so it can scale the exploration term.
  double range() const { return std::max(f_max - f_min, kRangeFloor); }

  bool operator==(const Surrogate &) const = default;
};

namespace detail {

using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline MatrixX interpolation_matrix(std::span<const Sample> samples, double epsilon)
{
  const auto n = static_cast<Eigen::Index>(samples.size());
  MatrixX a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0L;
    for (Eigen::Index j = 0; j < i; ++j) {
      a(i, j) = a(j, i) = multiquadric_ext(epsilon, squared_distance_ext(samples[i].x, samples[j].x));
    }
  }
  return a;
}

inline Real ridge_for(const MatrixX & a)
{
  return static_cast<Real>(kRidge) * a.trace() / static_cast<Real>(a.rows());
}

inline VectorX values_of(std::span<const Sample> samples)
{
  VectorX f(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    f(static_cast<Eigen::Index>(i)) = samples[i].f;
  }
  return f;
}

inline void require_distinct(std::span<const Sample> samples)
{
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (squared_distance(samples[i].x, samples[j].x) == 0.0) {
        throw Error("singular-system", "duplicate sample points " + std::to_string(j) + " and " +
                                         std::to_string(i));
      }
    }
  }
}

/// Solves a x = f by LU on `k` (a itself or a regularized copy), then refines
/// against `a` while that keeps reducing the residual.
inline VectorX solve_refined(const MatrixX & k, const MatrixX & a, const VectorX & f)
{
  const Eigen::PartialPivLU<MatrixX> lu(k);
  VectorX x = lu.solve(f);
  if (!x.allFinite()) {
    return x;
  }
  Real norm = (f - a * x).norm();
  for (int i = 0; i < 4 && norm > 0.0L; ++i) {
    const VectorX next = x + lu.solve(f - a * x);
    const Real next_norm = (f - a * next).norm();
    if (!next.allFinite() || !(next_norm < norm)) {
      break;
    }
    x = next;
    norm = next_norm;
  }
  return x;
}

}  // namespace detail

/// Fits the multiquadric interpolant by LU on the plain system with guarded
/// refinement; the ridge is used only if that yields non-finite coefficients.
inline Surrogate fit_surrogate(std::span<const Sample> samples, double epsilon)
{
  if (samples.empty()) {
    throw Error("invalid-argument", "fit_surrogate needs at least one sample");
  }
  if (!(epsilon > 0.0)) {
    throw Error("invalid-argument", "epsilon must be positive");
  }
  detail::require_distinct(samples);

  const detail::MatrixX a = detail::interpolation_matrix(samples, epsilon);
  const detail::VectorX f = detail::values_of(samples);
  detail::VectorX beta = detail::solve_refined(a, a, f);
  if (!beta.allFinite()) {
    detail::MatrixX k = a;
    k.diagonal().array() += detail::ridge_for(a);
    beta = detail::solve_refined(k, a, f);
  }
  if (!beta.allFinite()) {
    throw Error("singular-system", "RBF interpolation system produced non-finite coefficients");
  }

  Surrogate s;
  s.epsilon = epsilon;
  s.centers.reserve(samples.size());
  s.coeffs.resize(samples.size());
  s.f_min = std::numeric_limits<double>::infinity();
  s.f_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    s.centers.push_back(samples[i].x);
    s.coeffs[i] = beta(static_cast<Eigen::Index>(i));
    s.f_min = std::min(s.f_min, samples[i].f);
    s.f_max = std::max(s.f_max, samples[i].f);
  }
  return s;
}

/// Leave-one-out sum of squared prediction errors of the interpolant, from the
/// closed form e_i = (A^-1 f)_i / (A^-1)_ii.
inline double loo_error(std::span<const Sample> samples, double epsilon)
{
  const detail::MatrixX a = detail::interpolation_matrix(samples, epsilon);
  detail::MatrixX inv = a.partialPivLu().inverse();
  if (!inv.allFinite()) {
    detail::MatrixX k = a;
    k.diagonal().array() += detail::ridge_for(a);
    inv = k.partialPivLu().inverse();
  }
  const detail::VectorX beta = inv * detail::values_of(samples);
  Real total = 0.0L;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const Real e = beta(i) / inv(i, i);
    total += e * e;
  }
  return static_cast<double>(total);
}

/// Picks the grid value with the smallest leave-one-out error. Ties go to the
/// smallest epsilon; `current` is kept when no grid value gives a finite score.
inline double recalibrate_epsilon(std::span<const Sample> samples, std::span<const double> grid,
                                  double current = 1.0)
{
  if (samples.size() < 3) {
    throw Error("invalid-argument", "recalibrate_epsilon needs at least 3 samples");
  }
  if (grid.empty()) {
    return current;
  }
  if (grid.size() == 1) {
    return grid.front();
  }
  detail::require_distinct(samples);

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best_eps = current;
  double best_err = std::numeric_limits<double>::infinity();
  for (const double eps : sorted) {
    const double err = loo_error(samples, eps);
    if (std::isfinite(err) && err < best_err) {
      best_err = err;
      best_eps = eps;
    }
  }
  return best_eps;
}

}  // namespace falsify::glis
