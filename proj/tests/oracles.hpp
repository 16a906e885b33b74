#pragma once

#include "falsify/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

// Independent reference implementations shared by the unit tests and the acceptance run.
namespace falsify::oracle {

using sim::Trace;
using sim::VehicleState;

// Exact front-wheel path for constant inputs starting at the origin with theta = 0.
struct Arc
{
  double v;
  double psi;
  double length;

  double radius() const { return length / std::sin(psi); }
  double rate() const { return v * std::sin(psi) / length; }

  VehicleState at(double t) const
  {
    const double r = radius();
    const double th = rate() * t;
    // Center sits at (-r sin psi, r cos psi).
    return {-r * std::sin(psi) + r * std::sin(th + psi), r * std::cos(psi) - r * std::cos(th + psi),
            th};
  }
};

// Second transcription of the objective, written from the definition without
// sharing code with evaluate(): T_i = {t : d_xf <= L and d_wf <= W}.
inline double oracle_f(const Trace & trace, double length, double width, double w_safe)
{
  const std::size_t k = trace.ovs.size();
  std::vector<std::set<std::size_t>> t_collision(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t t = 0; t < trace.times.size(); ++t) {
      const double dx = std::abs(trace.sv[t].state.x_f - trace.ovs[i][t].x_f);
      const double dw = std::abs(trace.sv[t].state.w_f - trace.ovs[i][t].w_f);
      if (dx <= length && dw <= width) {
        t_collision[i].insert(t);
      }
    }
  }
  const bool i_collision =
    std::any_of(t_collision.begin(), t_collision.end(), [](const auto & s) { return !s.empty(); });
  double f = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double xc = 0.0;
    double wc = 0.0;
    if (!t_collision[i].empty()) {
      std::vector<double> xs;
      std::vector<double> ws;
      for (const std::size_t t : t_collision[i]) {
        xs.push_back(std::abs(trace.sv[t].state.x_f - trace.ovs[i][t].x_f));
        ws.push_back(std::abs(trace.sv[t].state.w_f - trace.ovs[i][t].w_f));
      }
      xc = *std::min_element(xs.begin(), xs.end());
      wc = *std::min_element(ws.begin(), ws.end());
    } else if (i_collision) {
      xc = length;
      wc = w_safe;
    } else {
      for (std::size_t t = 0; t < trace.times.size(); ++t) {
        xc += std::abs(trace.sv[t].state.x_f - trace.ovs[i][t].x_f);
        wc += std::abs(trace.sv[t].state.w_f - trace.ovs[i][t].w_f);
      }
    }
    f += xc + wc;
  }
  return f;
}

inline Trace random_trace(std::mt19937_64 & gen, std::size_t k, std::size_t steps, bool allow_collision)
{
  std::uniform_real_distribution<double> sv_x(0, 500), sv_w(-1.5, 4.5), dx(-20, 20), dw(-4, 4);
  std::bernoulli_distribution boundary(0.05);
  Trace t;
  t.ovs.assign(k, {});
  for (std::size_t s = 0; s < steps; ++s) {
    t.times.push_back(0.05 * static_cast<double>(s));
    const VehicleState sv{sv_x(gen), sv_w(gen), 0.0};
    t.sv.push_back({sv, {}});
    t.decisions.push_back(sim::Decision::KeepLane);
    for (std::size_t i = 0; i < k; ++i) {
      VehicleState ov{sv.x_f + dx(gen), sv.w_f + dw(gen), 0.0};
      if (boundary(gen)) {
        ov = {sv.x_f + 4.5, sv.w_f - 1.8, 0.0};
      }
      if (!allow_collision && std::abs(ov.x_f - sv.x_f) <= 4.5) {
        ov.x_f = sv.x_f + 4.5 + 1.0 + std::abs(dx(gen));
      }
      t.ovs[i].push_back(ov);
    }
  }
  return t;
}

}  // namespace falsify::oracle
