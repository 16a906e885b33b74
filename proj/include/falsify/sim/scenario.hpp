#pragma once

#include "falsify/error.hpp"
#include "falsify/sim/vehicle.hpp"
#include "falsify/sut/mpc.hpp"

#include <cmath>
#include <concepts>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

namespace falsify::sim {

struct ConstantVelocity
{
  bool operator==(const ConstantVelocity &) const = default;
};

/// Constant velocity until t_c, then a lane change to `target_lane` at the same speed.
struct LaneChangeAt
{
  double t_c = 0.0;
  int target_lane = 1;

  bool operator==(const LaneChangeAt &) const = default;
};

using OvBehavior = std::variant<ConstantVelocity, LaneChangeAt>;

struct OvSpec
{
  VehicleState init;
  double v0 = 0.0;
  OvBehavior behavior = ConstantVelocity{};

  bool operator==(const OvSpec &) const = default;
};

struct ScenarioConfig
{
  RoadGeometry road;
  VehicleState sv_init;
  double sv_v0 = 55.0;
  /// Shared by all vehicles; the collision test uses its L and W.
  VehicleGeometry geometry;
  std::vector<OvSpec> ovs;
  sut::SafetyDistances safety;
  double t_exp = 30.0;
  double dt = 0.05;
  sut::MpcConfig sut;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_exp / dt)); }

  void validate() const
  {
    road.validate();
    if (!(t_exp > 0.0) || !(dt > 0.0)) {
      throw Error("invalid-config", "t_exp and dt must be positive");
    }
    const double ratio = t_exp / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw Error("invalid-config", "t_exp must be an integer multiple of dt");
    }
    if (!(geometry.length > 0.0) || !(geometry.width > 0.0)) {
      throw Error("invalid-config", "vehicle length and width must be positive");
    }
    if (!road.on_road(sv_init.w_f)) {
      throw Error("invalid-config", "SV starts off the road");
    }
    for (std::size_t i = 0; i < ovs.size(); ++i) {
      if (!road.on_road(ovs[i].init.w_f)) {
        throw Error("invalid-config", "OV" + std::to_string(i + 1) + " starts off the road");
      }
      if (const auto * lc = std::get_if<LaneChangeAt>(&ovs[i].behavior)) {
        if (lc->target_lane < 0 || lc->target_lane >= road.lane_count) {
          throw Error("invalid-config", "lane-change target lane does not exist");
        }
      }
    }
    sut.validate();
  }

  bool operator==(const ScenarioConfig &) const = default;
};

struct SvRecord
{
  VehicleState state;
  ControlInput input;
};

struct Trace
{
  std::vector<double> times;
  std::vector<SvRecord> sv;
  /// ovs[i][k]: state of OV i at times[k].
  std::vector<std::vector<VehicleState>> ovs;
  std::vector<Decision> decisions;

  std::size_t size() const { return times.size(); }
};

/// Closed-form constant-velocity motion along the initial heading.
inline VehicleState constant_velocity_state(const OvSpec & spec, double t)
{
  return {spec.init.x_f + spec.v0 * std::cos(spec.init.theta) * t,
          spec.init.w_f + spec.v0 * std::sin(spec.init.theta) * t, spec.init.theta};
}

/// Advances one OV from `current` (its state at time t) to t + dt. Before
/// the switching time, and for constant-velocity OVs, motion is closed form.
inline VehicleState ov_kinematics(const OvSpec & spec, const VehicleState & current, double t,
                                  double dt, const RoadGeometry & road,
                                  const VehicleGeometry & geometry,
                                  sut::LaneChangeController * controller)
{
  const auto * lc = std::get_if<LaneChangeAt>(&spec.behavior);
  // The controller takes over at the first step starting at or after t_c.
  if (lc == nullptr || controller == nullptr || t < lc->t_c) {
    return constant_velocity_state(spec, t + dt);
  }
  const ControlInput u =
    controller->control(current, road.lane_center(lc->target_lane), spec.v0, geometry, dt);
  return step_bicycle(current, u, geometry, dt);
}

/// Anything that maps a scene observation to SV inputs plus a decision label.
template <typename C>
concept Controller = requires(C c, const sut::SceneObservation & obs) {
  { c.control(obs) } -> std::convertible_to<sut::ControlOutput>;
};

/// Closed-loop simulation over [0, t_exp]. At every recorded time the SUT is
/// queried with the current scene; its input is held over the following step.
template <Controller C>
Trace run_scenario(const ScenarioConfig & config, C & sut)
{
  config.validate();
  const std::size_t steps = config.steps();
  const std::size_t k = config.ovs.size();

  Trace trace;
  trace.times.reserve(steps + 1);
  trace.sv.reserve(steps + 1);
  trace.decisions.reserve(steps + 1);
  trace.ovs.assign(k, {});
  for (auto & s : trace.ovs) {
    s.reserve(steps + 1);
  }

  std::vector<std::optional<sut::LaneChangeController>> ov_controllers(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (std::holds_alternative<LaneChangeAt>(config.ovs[i].behavior)) {
      ov_controllers[i].emplace(config.sut);
    }
  }

  sut::SceneObservation obs;
  obs.geometry = config.geometry;
  obs.road = config.road;
  obs.safety = config.safety;
  obs.dt = config.dt;
  obs.sv = {config.sv_init, config.sv_v0};
  obs.ovs.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    obs.ovs[i] = {config.ovs[i].init, config.ovs[i].v0};
  }

  for (std::size_t step = 0; step <= steps; ++step) {
    const double t = static_cast<double>(step) * config.dt;
    const sut::ControlOutput out = sut.control(obs);
    if (!std::isfinite(out.input.v) || !std::isfinite(out.input.psi)) {
      throw Error("controller-failure", "SUT returned non-finite inputs at t=" + std::to_string(t));
    }
    trace.times.push_back(t);
    trace.sv.push_back({obs.sv.state, out.input});
    trace.decisions.push_back(out.decision);
    for (std::size_t i = 0; i < k; ++i) {
      trace.ovs[i].push_back(obs.ovs[i].state);
    }
    if (step == steps) {
      break;
    }
    obs.sv.state = step_bicycle(obs.sv.state, out.input, config.geometry, config.dt);
    obs.sv.v = out.input.v;
    for (std::size_t i = 0; i < k; ++i) {
      auto * ctl = ov_controllers[i] ? &*ov_controllers[i] : nullptr;
      obs.ovs[i].state = ov_kinematics(config.ovs[i], obs.ovs[i].state, t, config.dt, config.road,
                                       config.geometry, ctl);
    }
  }
  return trace;
}

/// Simulation with a fresh reference SUT built from `config.sut`.
inline Trace run_scenario(const ScenarioConfig & config)
{
  sut::MpcController controller(config.sut);
  return run_scenario(config, controller);
}

/// CSV export. Positions are absolute; the trailing *_rel columns are
/// longitudinal positions relative to the SV's initial x_f.
inline void write_trace_csv(std::ostream & out, const Trace & trace)
{
  const std::size_t k = trace.ovs.size();
  out << "t,sv_xf,sv_wf,sv_theta,sv_v,sv_psi,decision";
  for (std::size_t i = 1; i <= k; ++i) {
    out << ",ov" << i << "_xf,ov" << i << "_wf";
  }
  out << ",sv_xf_rel";
  for (std::size_t i = 1; i <= k; ++i) {
    out << ",ov" << i << "_xf_rel";
  }
  out << '\n';
  if (trace.size() == 0) {
    return;
  }
  const double x0 = trace.sv.front().state.x_f;
  const auto old_precision = out.precision(17);
  for (std::size_t s = 0; s < trace.size(); ++s) {
    const auto & sv = trace.sv[s];
    out << trace.times[s] << ',' << sv.state.x_f << ',' << sv.state.w_f << ',' << sv.state.theta
        << ',' << sv.input.v << ',' << sv.input.psi << ',' << to_string(trace.decisions[s]);
    for (std::size_t i = 0; i < k; ++i) {
      out << ',' << trace.ovs[i][s].x_f << ',' << trace.ovs[i][s].w_f;
    }
    out << ',' << sv.state.x_f - x0;
    for (std::size_t i = 0; i < k; ++i) {
      out << ',' << trace.ovs[i][s].x_f - x0;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace falsify::sim
