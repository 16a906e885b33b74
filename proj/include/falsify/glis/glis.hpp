#pragma once

#include "falsify/error.hpp"
#include "falsify/glis/idw.hpp"
#include "falsify/glis/lhs.hpp"
#include "falsify/glis/problem.hpp"
#include "falsify/glis/pso.hpp"
#include "falsify/glis/rbf.hpp"
#include "falsify/glis/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace falsify::glis {

/// Minimum distance to an existing sample below which a query is replaced.
inline constexpr double kDuplicateTolerance = 1e-9;

struct GlisState
{
  std::vector<Sample> samples;
  std::optional<Surrogate> surrogate;
  double epsilon = 1.0;
  bool recalibrated = false;
  Rng rng;

  std::size_t iteration() const { return samples.size(); }
};

/// a(x) = surrogate(x) - delta * range(f) * z(x).
inline double acquisition(VectorView x, const GlisState & state, double delta)
{
  if (!state.surrogate) {
    throw Error("invalid-state", "acquisition needs a fitted surrogate");
  }
  const Surrogate & s = *state.surrogate;
  const double exploit = s(x);
  if (delta == 0.0) {
    return exploit;
  }
  return exploit - delta * s.range() * idw_exploration(x, state.samples);
}

/// Called after every surrogate fit with the surrogate and the samples it interpolates.
using FitObserver = std::function<void(const Surrogate &, std::span<const Sample>)>;

/// Refits the surrogate to all samples (recalibrating epsilon once, when the
/// sample count reaches the recalibration iteration) and returns the
/// minimizer of the acquisition function.
inline Vector glis_step(GlisState & state, const OptProblem & problem, const GlisConfig & config,
                        const FitObserver & on_fit = {})
{
  if (state.iteration() < static_cast<std::size_t>(config.n_init) || state.samples.empty()) {
    throw Error("invalid-state", "glis_step needs at least n_init samples");
  }
  if (!state.recalibrated &&
      state.iteration() == static_cast<std::size_t>(config.recalibration_iteration()) &&
      state.samples.size() >= 3) {
    state.epsilon = recalibrate_epsilon(state.samples, config.epsilon_grid, state.epsilon);
    state.recalibrated = true;
  }
  state.surrogate = fit_surrogate(state.samples, state.epsilon);
  if (on_fit) {
    on_fit(*state.surrogate, state.samples);
  }

  const auto a = [&](VectorView x) { return acquisition(x, state, config.delta); };
  PsoResult best = pso_search(a, problem, config.pso, state.rng);

  bool duplicate = false;
  for (const Sample & s : state.samples) {
    if (std::sqrt(squared_distance(best.x, s.x)) < kDuplicateTolerance) {
      duplicate = true;
      break;
    }
  }
  if (duplicate || !best.feasible) {
    return random_feasible_point(problem, state.rng);
  }
  return best.x;
}

struct GlisResult
{
  Sample best;
  /// Every evaluation, in order, in the problem's own coordinates.
  std::vector<Sample> samples;
  double final_epsilon = 1.0;
};

namespace detail {

/// Affine map between the problem box and [-1, 1]^n.
struct BoxScaling
{
  Vector center;
  Vector half_width;

  explicit BoxScaling(const OptProblem & p) : center(p.dim()), half_width(p.dim())
  {
    for (std::size_t i = 0; i < p.dim(); ++i) {
      center[i] = 0.5 * (p.upper[i] + p.lower[i]);
      half_width[i] = 0.5 * (p.upper[i] - p.lower[i]);
    }
  }

  Vector to_problem(VectorView z, const OptProblem & p) const
  {
    Vector x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      // Exact at the bounds so corner scenes are reachable verbatim.
      if (z[i] <= -1.0) {
        x[i] = p.lower[i];
      } else if (z[i] >= 1.0) {
        x[i] = p.upper[i];
      } else {
        x[i] = std::clamp(center[i] + half_width[i] * z[i], p.lower[i], p.upper[i]);
      }
    }
    return x;
  }
};

/// The problem the search works on: either `p` itself or its scaled image.
struct SearchSpace
{
  const OptProblem & original;
  std::optional<BoxScaling> scaling;
  OptProblem search;

  SearchSpace(const OptProblem & p, bool scale) : original(p)
  {
    if (!scale) {
      search = p;
      return;
    }
    scaling.emplace(p);
    search.lower.assign(p.dim(), -1.0);
    search.upper.assign(p.dim(), 1.0);
    if (p.feasible) {
      search.feasible = [this](VectorView z) { return original.is_feasible(to_problem(z)); };
    }
    if (p.violation) {
      search.violation = [this](VectorView z) {
        return original.constraint_violation(to_problem(z));
      };
    }
  }

  SearchSpace(const SearchSpace &) = delete;
  SearchSpace & operator=(const SearchSpace &) = delete;

  Vector to_problem(VectorView z) const
  {
    return scaling ? scaling->to_problem(z, original) : Vector(z.begin(), z.end());
  }
};

struct Evaluator
{
  const SearchSpace & space;
  GlisState & state;
  std::vector<Sample> & history;

  void operator()(const Vector & z)
  {
    Vector x = space.to_problem(z);
    const double f = space.original.objective(x);
    state.samples.push_back({z, f});
    history.push_back({std::move(x), f});
  }
};

inline GlisResult finish(std::vector<Sample> history, double epsilon)
{
  GlisResult result;
  result.samples = std::move(history);
  result.final_epsilon = epsilon;
  result.best = *std::min_element(
    result.samples.begin(), result.samples.end(),
    [](const Sample & a, const Sample & b) { return a.f < b.f; });
  return result;
}

}  // namespace detail

/// Full GLIS run: n_init Latin-hypercube evaluations, then active learning
/// until exactly n_max objective evaluations have been made.
inline GlisResult glis_run(const OptProblem & problem, const GlisConfig & config,
                           const FitObserver & on_fit = {})
{
  problem.validate();
  config.validate();
  const detail::SearchSpace space(problem, config.scale_variables);

  GlisState state;
  state.rng = Rng(config.seed);
  state.epsilon = config.epsilon0;
  std::vector<Sample> history;
  history.reserve(static_cast<std::size_t>(config.n_max));
  detail::Evaluator evaluate{space, state, history};

  for (const Vector & z : lhs_sample(config.n_init, space.search, state.rng)) {
    evaluate(z);
  }
  while (state.iteration() < static_cast<std::size_t>(config.n_max)) {
    evaluate(glis_step(state, space.search, config, on_fit));
  }
  return detail::finish(std::move(history), state.epsilon);
}

/// Random-sampling baseline: the same initial design as `glis_run` for the
/// same seed, followed by a second Latin-hypercube batch that fills the budget.
inline GlisResult lhs_run(const OptProblem & problem, const GlisConfig & config)
{
  problem.validate();
  config.validate();
  const detail::SearchSpace space(problem, config.scale_variables);

  GlisState state;
  state.rng = Rng(config.seed);
  std::vector<Sample> history;
  history.reserve(static_cast<std::size_t>(config.n_max));
  detail::Evaluator evaluate{space, state, history};

  for (const Vector & z : lhs_sample(config.n_init, space.search, state.rng)) {
    evaluate(z);
  }
  if (config.n_max > config.n_init) {
    for (const Vector & z : lhs_sample(config.n_max - config.n_init, space.search, state.rng)) {
      evaluate(z);
    }
  }
  return detail::finish(std::move(history), state.epsilon);
}

}  // namespace falsify::glis
