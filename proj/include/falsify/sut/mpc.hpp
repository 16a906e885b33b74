#pragma once

#include "falsify/error.hpp"
#include "falsify/glis/problem.hpp"
#include "falsify/glis/pso.hpp"
#include "falsify/glis/rng.hpp"
#include "falsify/sim/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace falsify::sut {

using sim::ControlInput;
using sim::Decision;
using sim::RoadGeometry;
using sim::VehicleGeometry;
using sim::VehicleState;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Receding-horizon tracker settings. The inner problem is solved by PSO over
/// a move-blocked input sequence: `input_blocks` holds the number of steps
/// each (v, psi) pair is held and must sum to `horizon`.
struct MpcConfig
{
  int horizon = 10;
  std::vector<int> input_blocks = {3, 7};
  double q_w = 1.0;
  double q_v = 0.1;
  double r_psi = 10.0;
  double r_dv = 0.01;
  /// Weight of the quadratic output-constraint penalty.
  double penalty = 1e4;
  double v_ref = 55.0;
  double v_min = 0.0;
  double v_max = 100.0;
  double psi_max = 0.3;
  /// Bound on |dv/dt| applied to the commanded velocity [m/s^2].
  double accel_max = 8.0;
  /// Default lateral output bounds.
  double w_f_min = -0.6;
  double w_f_max = 3.6;
  glis::PsoConfig pso{.swarm_size = 12, .iterations = 10};
  /// Objective evaluations spent on a compass-search polish of the PSO result.
  int polish_evaluations = 60;
  std::uint64_t seed = 1;

  void validate() const
  {
    if (horizon < 1 || input_blocks.empty() ||
        std::accumulate(input_blocks.begin(), input_blocks.end(), 0) != horizon ||
        std::any_of(input_blocks.begin(), input_blocks.end(), [](int b) { return b < 1; })) {
      throw Error("invalid-config", "input_blocks must be positive and sum to horizon");
    }
    if (q_w < 0 || q_v < 0 || r_psi < 0 || r_dv < 0 || penalty < 0) {
      throw Error("invalid-config", "MPC weights must be nonnegative");
    }
    if (!(v_min < v_max) || !(psi_max > 0) || !(accel_max > 0) || !(w_f_min <= w_f_max)) {
      throw Error("invalid-config", "inconsistent MPC bounds");
    }
    if (polish_evaluations < 0) {
      throw Error("invalid-config", "polish_evaluations must be nonnegative");
    }
    pso.validate();
  }

  bool operator==(const MpcConfig &) const = default;
};

struct SafetyDistances
{
  double x_f_safe = 10.0;
  double w_f_safe = 3.0;

  bool operator==(const SafetyDistances &) const = default;
};

struct ObservedVehicle
{
  VehicleState state;
  double v = 0.0;
};

/// Everything the controller sees at one step.
struct SceneObservation
{
  ObservedVehicle sv;
  std::vector<ObservedVehicle> ovs;
  VehicleGeometry geometry;
  RoadGeometry road;
  SafetyDistances safety;
  double dt = 0.05;
};

/// Longitudinal output bound tied to the constant-velocity prediction of one OV.
struct LongitudinalBound
{
  std::size_t ov = 0;
  /// Signed offset from the OV position: +1.1L (min bound) or -1.1L (max bound).
  double offset = 0.0;
  bool upper = true;
};

struct AdaptiveConstraints
{
  double w_f_min = -0.6;
  double w_f_max = 3.6;
  double x_f_min = -kUnbounded;
  double x_f_max = kUnbounded;
  Decision decision = Decision::KeepLane;
  /// Lane the SV should track (ChangeLane: the target lane).
  int target_lane = 0;
  std::vector<LongitudinalBound> x_bounds;
};

/// Straight-line propagation of both vehicles over one step at their current
/// velocities, then the collision test on the propagated states.
inline bool next_step_collision_check(const ObservedVehicle & sv, const ObservedVehicle & ov,
                                      const VehicleGeometry & geometry, double dt)
{
  auto advance = [dt](const ObservedVehicle & o) {
    return VehicleState{o.state.x_f + o.v * std::cos(o.state.theta) * dt,
                        o.state.w_f + o.v * std::sin(o.state.theta) * dt, o.state.theta};
  };
  return sim::collision_at(advance(sv), advance(ov), geometry);
}

namespace detail {

inline bool within_safety(const sim::Distances & d, const SafetyDistances & safety)
{
  return d.d_xf <= safety.x_f_safe && d.d_wf <= safety.w_f_safe;
}

}  // namespace detail

/// Adaptive output constraints: for every OV on the SV's lane within both
/// safety distances, either change lane (OV ahead, no collision in the next
/// step, every other OV outside the safety distances) or bound the SV's
/// longitudinal position 1.1 L behind / ahead of that OV.
inline AdaptiveConstraints adaptive_constraints(const SceneObservation & obs,
                                                const MpcConfig & config)
{
  AdaptiveConstraints ac;
  ac.w_f_min = config.w_f_min;
  ac.w_f_max = config.w_f_max;
  const RoadGeometry & road = obs.road;
  const int sv_lane = road.lane_of(obs.sv.state.w_f);
  ac.target_lane = sv_lane;

  bool change_lane = false;
  bool decel_accel = false;
  const double margin = 1.1 * obs.geometry.length;

  for (std::size_t i = 0; i < obs.ovs.size(); ++i) {
    const auto & ov = obs.ovs[i];
    const auto d = sim::pairwise_distances(obs.sv.state, ov.state);
    const bool same_lane = d.d_wf < 0.5 * road.lane_width();
    if (!same_lane || !detail::within_safety(d, obs.safety)) {
      continue;
    }
    const bool ahead = ov.state.x_f > obs.sv.state.x_f;
    const bool no_next_collision =
      !next_step_collision_check(obs.sv, ov, obs.geometry, obs.dt);
    bool others_clear = true;
    for (std::size_t j = 0; j < obs.ovs.size() && others_clear; ++j) {
      if (j != i) {
        others_clear = !detail::within_safety(
          sim::pairwise_distances(obs.sv.state, obs.ovs[j].state), obs.safety);
      }
    }

    // Higher lane when the SV is level with or above the OV, lower otherwise;
    // fall back to whichever neighbour exists.
    const bool prefer_up = obs.sv.state.w_f >= ov.state.w_f;
    const bool has_up = sv_lane + 1 < road.lane_count;
    const bool has_down = sv_lane > 0;
    const bool go_up = has_up && (prefer_up || !has_down);
    const bool lane_exists = has_up || has_down;

    if (ahead && no_next_collision && others_clear && lane_exists) {
      change_lane = true;
      if (go_up) {
        ac.w_f_min = std::max(ac.w_f_min, ov.state.w_f + obs.safety.w_f_safe);
        ac.target_lane = sv_lane + 1;
      } else {
        ac.w_f_max = std::min(ac.w_f_max, ov.state.w_f - obs.safety.w_f_safe);
        ac.target_lane = sv_lane - 1;
      }
    } else {
      decel_accel = true;
      if (ahead) {
        ac.x_f_max = std::min(ac.x_f_max, ov.state.x_f - margin);
        ac.x_bounds.push_back({i, -margin, true});
      } else {
        ac.x_f_min = std::max(ac.x_f_min, ov.state.x_f + margin);
        ac.x_bounds.push_back({i, margin, false});
      }
    }
  }

  if (decel_accel && !change_lane) {
    // Braking for an OV keeps the SV inside its lane; otherwise the tracker
    // meets the x_f bound by steering across the road.
    ac.w_f_min = std::max(ac.w_f_min, road.lane_center(sv_lane) - 0.5 * road.lane_width());
    ac.w_f_max = std::min(ac.w_f_max, road.lane_center(sv_lane) + 0.5 * road.lane_width());
  }
  if (ac.w_f_min > ac.w_f_max) {
    ac.w_f_min = ac.w_f_max;
  }
  if (decel_accel) {
    ac.decision = Decision::DecelAccel;
  } else if (change_lane) {
    ac.decision = Decision::ChangeLane;
  }
  return ac;
}

namespace detail {

/// Single-shooting cost of a move-blocked input sequence over RK4 rollouts.
struct TrackingProblem
{
  const MpcConfig & config;
  VehicleState start;
  double v_start = 0.0;
  VehicleGeometry geometry;
  double dt = 0.05;
  double w_ref = 0.0;
  double w_min = -kUnbounded;
  double w_max = kUnbounded;
  /// Fixed velocity (OV lane change): the decision vector then holds only steering.
  std::optional<double> v_pinned;
  /// Longitudinal bounds: (OV position, OV velocity, offset, upper).
  struct PredictedBound
  {
    double x0;
    double v;
    double offset;
    bool upper;
  };
  std::vector<PredictedBound> x_bounds;

  std::size_t blocks() const { return config.input_blocks.size(); }
  std::size_t dim() const { return v_pinned ? blocks() : 2 * blocks(); }

  double velocity_target(glis::VectorView z, std::size_t b) const
  {
    return v_pinned ? *v_pinned : z[b];
  }
  double steering(glis::VectorView z, std::size_t b) const
  {
    return v_pinned ? z[b] : z[blocks() + b];
  }

  double rate_limited(double target, double previous) const
  {
    const double dv = config.accel_max * dt;
    if (v_pinned) {
      return target;
    }
    return std::clamp(std::clamp(target, previous - dv, previous + dv), config.v_min,
                      config.v_max);
  }

  double cost(glis::VectorView z) const
  {
    VehicleState s = start;
    double v_prev = v_start;
    double total = 0.0;
    int step = 0;
    for (std::size_t b = 0; b < blocks(); ++b) {
      const double target = velocity_target(z, b);
      const double psi = steering(z, b);
      for (int k = 0; k < config.input_blocks[b]; ++k, ++step) {
        const double v = rate_limited(target, v_prev);
        s = sim::step_bicycle(s, {v, psi}, geometry, dt);
        const double ew = s.w_f - w_ref;
        const double dv = v - v_prev;
        const double ev = v - config.v_ref;
        total += config.q_w * ew * ew + r_psi() * psi * psi;
        if (!v_pinned) {
          total += config.q_v * ev * ev + config.r_dv * dv * dv;
        }
        double violation = std::max(0.0, w_min - s.w_f) + std::max(0.0, s.w_f - w_max);
        const double t = (step + 1) * dt;
        for (const auto & xb : x_bounds) {
          const double bound = xb.x0 + xb.v * t + xb.offset;
          violation += xb.upper ? std::max(0.0, s.x_f - bound) : std::max(0.0, bound - s.x_f);
        }
        total += config.penalty * violation * violation;
        v_prev = v;
      }
    }
    return total;
  }

  double r_psi() const { return config.r_psi; }

  glis::OptProblem box() const
  {
    glis::OptProblem p;
    for (std::size_t b = 0; b < blocks() && !v_pinned; ++b) {
      p.lower.push_back(config.v_min);
      p.upper.push_back(config.v_max);
    }
    for (std::size_t b = 0; b < blocks(); ++b) {
      p.lower.push_back(-config.psi_max);
      p.upper.push_back(config.psi_max);
    }
    return p;
  }

  glis::Vector constant_guess(double v, double psi) const
  {
    glis::Vector z;
    for (std::size_t b = 0; b < blocks() && !v_pinned; ++b) {
      z.push_back(std::clamp(v, config.v_min, config.v_max));
    }
    for (std::size_t b = 0; b < blocks(); ++b) {
      z.push_back(std::clamp(psi, -config.psi_max, config.psi_max));
    }
    return z;
  }

  ControlInput first_input(glis::VectorView z) const
  {
    const double v = rate_limited(velocity_target(z, 0), v_start);
    return {v, std::clamp(steering(z, 0), -config.psi_max, config.psi_max)};
  }
};

/// Deterministic compass search: tries +-step along each axis, halving the
/// step after a full sweep without improvement.
template <typename F>
glis::Vector compass_polish(const F & cost, const glis::OptProblem & box, glis::Vector x,
                            double value, int budget)
{
  glis::Vector step(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    step[d] = 0.02 * (box.upper[d] - box.lower[d]);
  }
  while (budget > 0) {
    bool improved = false;
    for (std::size_t d = 0; d < x.size() && budget > 0; ++d) {
      for (const double sign : {1.0, -1.0}) {
        if (budget-- <= 0) {
          break;
        }
        glis::Vector trial = x;
        trial[d] = std::clamp(x[d] + sign * step[d], box.lower[d], box.upper[d]);
        const double v = cost(trial);
        if (v < value) {
          value = v;
          x = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (double & s : step) {
        s *= 0.5;
      }
    }
  }
  return x;
}

/// Solves the tracking problem with a fixed-seed PSO warm-started from `warm`.
inline glis::Vector solve_tracking(const TrackingProblem & problem, const glis::Vector & warm)
{
  const glis::OptProblem box = problem.box();
  const double hold_psi = -problem.start.theta;
  std::vector<glis::Vector> seeds;
  if (warm.size() == problem.dim()) {
    seeds.push_back(warm);
  }
  seeds.push_back(problem.constant_guess(problem.v_start, hold_psi));
  seeds.push_back(problem.constant_guess(problem.config.v_ref, hold_psi));
  if (!problem.v_pinned) {
    seeds.push_back(problem.constant_guess(problem.config.v_min, hold_psi));
    seeds.push_back(problem.constant_guess(problem.config.v_max, hold_psi));
  }
  glis::Rng rng(problem.config.seed);
  const auto cost = [&problem](glis::VectorView z) { return problem.cost(z); };
  const glis::PsoResult found = glis::pso_search(cost, box, problem.config.pso, rng, seeds);
  return compass_polish(cost, box, found.x, found.value, problem.config.polish_evaluations);
}

inline void require_finite(const ControlInput & u)
{
  if (!std::isfinite(u.v) || !std::isfinite(u.psi)) {
    throw Error("controller-failure", "MPC solve returned non-finite inputs");
  }
}

}  // namespace detail

struct ControlOutput
{
  ControlInput input;
  Decision decision = Decision::KeepLane;
};

/// The subject vehicle's controller under test. Holds the warm start of the
/// previous solve, so one instance drives one simulation.
class MpcController
{
public:
  explicit MpcController(MpcConfig config = {}) : config_(std::move(config)) { config_.validate(); }

  const MpcConfig & config() const { return config_; }

  ControlOutput control(const SceneObservation & obs)
  {
    const AdaptiveConstraints ac = adaptive_constraints(obs, config_);
    detail::TrackingProblem problem{config_};
    problem.start = obs.sv.state;
    problem.v_start = obs.sv.v;
    problem.geometry = obs.geometry;
    problem.dt = obs.dt;
    problem.w_ref = obs.road.lane_center(ac.target_lane);
    problem.w_min = ac.w_f_min;
    problem.w_max = ac.w_f_max;
    for (const auto & xb : ac.x_bounds) {
      const auto & ov = obs.ovs[xb.ov];
      problem.x_bounds.push_back(
        {ov.state.x_f, ov.v * std::cos(ov.state.theta), xb.offset, xb.upper});
    }
    warm_ = detail::solve_tracking(problem, warm_);
    ControlOutput out{problem.first_input(warm_), ac.decision};
    detail::require_finite(out.input);
    last_constraints_ = ac;
    return out;
  }

  const AdaptiveConstraints & last_constraints() const { return last_constraints_; }

private:
  MpcConfig config_;
  glis::Vector warm_;
  AdaptiveConstraints last_constraints_;
};

/// Convenience wrapper: one solve from a fresh controller.
inline ControlInput sv_control(const SceneObservation & obs, const MpcConfig & config)
{
  MpcController controller(config);
  return controller.control(obs).input;
}

/// Lane-change tracker for an obstacle vehicle: fixed lateral reference,
/// velocity pinned, no collision avoidance.
class LaneChangeController
{
public:
  explicit LaneChangeController(MpcConfig config = {}) : config_(std::move(config))
  {
    config_.validate();
  }

  ControlInput control(const VehicleState & state, double target_center, double v_const,
                       const VehicleGeometry & geometry, double dt)
  {
    detail::TrackingProblem problem{config_};
    problem.start = state;
    problem.v_start = v_const;
    problem.geometry = geometry;
    problem.dt = dt;
    problem.w_ref = target_center;
    problem.v_pinned = v_const;
    warm_ = detail::solve_tracking(problem, warm_);
    ControlInput u = problem.first_input(warm_);
    detail::require_finite(u);
    return u;
  }

private:
  MpcConfig config_;
  glis::Vector warm_;
};

inline ControlInput ov_lane_change_control(const VehicleState & ov_state, double target_lane_center,
                                           double v_const, const MpcConfig & config,
                                           const VehicleGeometry & geometry = {},
                                           double dt = 0.05)
{
  LaneChangeController controller(config);
  return controller.control(ov_state, target_lane_center, v_const, geometry, dt);
}

}  // namespace falsify::sut
