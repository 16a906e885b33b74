#pragma once

#include "falsify/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

namespace falsify::sim {

/// Front-wheel reference point and yaw of a vehicle.
struct VehicleState
{
  double x_f = 0.0;    ///< longitudinal position [m]
  double w_f = 0.0;    ///< lateral position [m]
  double theta = 0.0;  ///< yaw angle [rad]

  bool operator==(const VehicleState &) const = default;
};

struct ControlInput
{
  double v = 0.0;    ///< velocity [m/s]
  double psi = 0.0;  ///< steering angle [rad]

  bool operator==(const ControlInput &) const = default;
};

struct VehicleGeometry
{
  double length = 4.5;
  double width = 1.8;

  bool operator==(const VehicleGeometry &) const = default;
};

/// Straight road between lateral coordinates w_lo and w_hi, split into equal lanes.
struct RoadGeometry
{
  double w_lo = -1.5;
  double w_hi = 4.5;
  int lane_count = 2;

  double lane_width() const { return (w_hi - w_lo) / lane_count; }

  /// 0-based lane index containing w (clamped to the road).
  int lane_of(double w) const
  {
    const int lane = static_cast<int>(std::floor((w - w_lo) / lane_width()));
    return std::clamp(lane, 0, lane_count - 1);
  }

  double lane_center(int lane) const { return w_lo + (lane + 0.5) * lane_width(); }

  bool on_road(double w) const { return w >= w_lo && w <= w_hi; }

  void validate() const
  {
    if (!(w_lo < w_hi) || lane_count < 1) {
      throw Error("invalid-config", "road needs w_lo < w_hi and at least one lane");
    }
  }

  bool operator==(const RoadGeometry &) const = default;
};

/// Decision label of the controller under test at one step.
enum class Decision { KeepLane, ChangeLane, DecelAccel };

inline std::string_view to_string(Decision d)
{
  switch (d) {
    case Decision::KeepLane:
      return "KeepLane";
    case Decision::ChangeLane:
      return "ChangeLane";
    case Decision::DecelAccel:
      return "DecelAccel";
  }
  return "KeepLane";
}

inline Decision decision_from_string(std::string_view s)
{
  if (s == "KeepLane") {
    return Decision::KeepLane;
  }
  if (s == "ChangeLane") {
    return Decision::ChangeLane;
  }
  if (s == "DecelAccel") {
    return Decision::DecelAccel;
  }
  throw Error("parse-error", "unknown decision label '" + std::string(s) + "'");
}

/// Kinematic bicycle model in front-wheel coordinates:
///   x_f' = v cos(theta + psi),  w_f' = v sin(theta + psi),  theta' = v sin(psi) / L.
inline VehicleState bicycle_rates(const VehicleState & s, const ControlInput & u, double length)
{
  const double heading = s.theta + u.psi;
  return {u.v * std::cos(heading), u.v * std::sin(heading), u.v * std::sin(u.psi) / length};
}

/// One classical RK4 step with the input held over [t, t + dt].
inline VehicleState step_bicycle(const VehicleState & s, const ControlInput & u,
                                 const VehicleGeometry & geometry, double dt)
{
  const double length = geometry.length;
  auto shifted = [](const VehicleState & a, const VehicleState & k, double h) {
    return VehicleState{a.x_f + h * k.x_f, a.w_f + h * k.w_f, a.theta + h * k.theta};
  };
  const VehicleState k1 = bicycle_rates(s, u, length);
  const VehicleState k2 = bicycle_rates(shifted(s, k1, 0.5 * dt), u, length);
  const VehicleState k3 = bicycle_rates(shifted(s, k2, 0.5 * dt), u, length);
  const VehicleState k4 = bicycle_rates(shifted(s, k3, dt), u, length);
  const double h = dt / 6.0;
  return {s.x_f + h * (k1.x_f + 2.0 * k2.x_f + 2.0 * k3.x_f + k4.x_f),
          s.w_f + h * (k1.w_f + 2.0 * k2.w_f + 2.0 * k3.w_f + k4.w_f),
          s.theta + h * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta)};
}

struct Distances
{
  double d_xf = 0.0;
  double d_wf = 0.0;
};

/// Absolute longitudinal and lateral offsets between two reference points.
inline Distances pairwise_distances(const VehicleState & sv, const VehicleState & ov)
{
  return {std::abs(sv.x_f - ov.x_f), std::abs(sv.w_f - ov.w_f)};
}

/// Collision test with inclusive thresholds: d_xf <= L and d_wf <= W.
inline bool collides(const Distances & d, const VehicleGeometry & geometry)
{
  return d.d_xf <= geometry.length && d.d_wf <= geometry.width;
}

inline bool collision_at(const VehicleState & sv, const VehicleState & ov,
                         const VehicleGeometry & geometry)
{
  return collides(pairwise_distances(sv, ov), geometry);
}

}  // namespace falsify::sim
