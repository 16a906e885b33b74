#pragma once

#include "falsify/error.hpp"
#include "falsify/sim/scenario.hpp"
#include "falsify/sim/vehicle.hpp"
#include "falsify/sut/mpc.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace falsify {

struct OvCriticality
{
  bool collided = false;
  double d_xf_critical = 0.0;
  double d_wf_critical = 0.0;

  bool operator==(const OvCriticality &) const = default;
};

struct CriticalityReport
{
  double f_value = 0.0;
  std::vector<OvCriticality> per_ov;
  bool collided_any = false;
  /// collision_steps[i]: trace indices where the SV collides with OV i.
  std::vector<std::vector<std::size_t>> collision_steps;

  bool operator==(const CriticalityReport &) const = default;
};

/// Collision-based objective. Per OV: the minimum distances over its own
/// collision steps if it collided; L + w_f_safe if only some other OV
/// collided; otherwise the distances summed over the whole trace.
inline CriticalityReport evaluate(const sim::Trace & trace, const sim::VehicleGeometry & geometry,
                                  const sut::SafetyDistances & safety)
{
  if (trace.size() == 0) {
    throw Error("empty-trace", "cannot evaluate an empty trace");
  }
  const std::size_t k = trace.ovs.size();
  CriticalityReport report;
  report.per_ov.resize(k);
  report.collision_steps.resize(k);

  std::vector<double> sum_x(k, 0.0);
  std::vector<double> sum_w(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (trace.ovs[i].size() != trace.size()) {
      throw Error("invalid-argument", "OV state list length differs from the trace length");
    }
    auto & ov = report.per_ov[i];
    ov.d_xf_critical = std::numeric_limits<double>::infinity();
    ov.d_wf_critical = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < trace.size(); ++s) {
      const auto d = sim::pairwise_distances(trace.sv[s].state, trace.ovs[i][s]);
      sum_x[i] += d.d_xf;
      sum_w[i] += d.d_wf;
      if (sim::collides(d, geometry)) {
        ov.collided = true;
        report.collision_steps[i].push_back(s);
        ov.d_xf_critical = std::min(ov.d_xf_critical, d.d_xf);
        ov.d_wf_critical = std::min(ov.d_wf_critical, d.d_wf);
      }
    }
    report.collided_any = report.collided_any || ov.collided;
  }

  for (std::size_t i = 0; i < k; ++i) {
    auto & ov = report.per_ov[i];
    if (!ov.collided) {
      if (report.collided_any) {
        ov.d_xf_critical = geometry.length;
        ov.d_wf_critical = safety.w_f_safe;
      } else {
        ov.d_xf_critical = sum_x[i];
        ov.d_wf_critical = sum_w[i];
      }
    }
    report.f_value += ov.d_xf_critical + ov.d_wf_critical;
  }
  return report;
}

inline bool is_critical(const CriticalityReport & report) { return report.collided_any; }

}  // namespace falsify
