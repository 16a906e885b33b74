#pragma once

#include "falsify/campaign.hpp"
#include "falsify/criticality.hpp"
#include "falsify/error.hpp"
#include "falsify/sim/scenario.hpp"
#include "falsify/sut/mpc.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// JSON mapping. Readers fill absent keys from the in-code defaults, so a
// config file only needs the fields it overrides.

namespace falsify::glis {

inline void to_json(nlohmann::json & j, const PsoConfig & c)
{
  j = {{"swarm_size", c.swarm_size}, {"iterations", c.iterations}, {"inertia", c.inertia},
       {"cognitive", c.cognitive},   {"social", c.social},         {"velocity_clamp", c.velocity_clamp}};
}

inline void from_json(const nlohmann::json & j, PsoConfig & c)
{
  const PsoConfig d;
  c.swarm_size = j.value("swarm_size", d.swarm_size);
  c.iterations = j.value("iterations", d.iterations);
  c.inertia = j.value("inertia", d.inertia);
  c.cognitive = j.value("cognitive", d.cognitive);
  c.social = j.value("social", d.social);
  c.velocity_clamp = j.value("velocity_clamp", d.velocity_clamp);
}

}  // namespace falsify::glis

namespace falsify::sim {

inline void to_json(nlohmann::json & j, const VehicleState & s)
{
  j = {{"x_f", s.x_f}, {"w_f", s.w_f}, {"theta", s.theta}};
}

inline void from_json(const nlohmann::json & j, VehicleState & s)
{
  s.x_f = j.value("x_f", 0.0);
  s.w_f = j.value("w_f", 0.0);
  s.theta = j.value("theta", 0.0);
}

inline void to_json(nlohmann::json & j, const RoadGeometry & r)
{
  j = {{"w_lo", r.w_lo}, {"w_hi", r.w_hi}, {"lane_count", r.lane_count}};
}

inline void from_json(const nlohmann::json & j, RoadGeometry & r)
{
  const RoadGeometry d;
  r.w_lo = j.value("w_lo", d.w_lo);
  r.w_hi = j.value("w_hi", d.w_hi);
  r.lane_count = j.value("lane_count", d.lane_count);
}

inline void to_json(nlohmann::json & j, const VehicleGeometry & g)
{
  j = {{"length", g.length}, {"width", g.width}};
}

inline void from_json(const nlohmann::json & j, VehicleGeometry & g)
{
  const VehicleGeometry d;
  g.length = j.value("length", d.length);
  g.width = j.value("width", d.width);
}

inline void to_json(nlohmann::json & j, const OvSpec & o)
{
  j = {{"x_f", o.init.x_f}, {"w_f", o.init.w_f}, {"theta", o.init.theta}, {"v", o.v0}};
  if (const auto * lc = std::get_if<LaneChangeAt>(&o.behavior)) {
    j["behavior"] = {{"type", "LaneChangeAt"}, {"t_c", lc->t_c}, {"target_lane", lc->target_lane}};
  } else {
    j["behavior"] = {{"type", "ConstantVelocity"}};
  }
}

inline void from_json(const nlohmann::json & j, OvSpec & o)
{
  from_json(j, o.init);
  o.v0 = j.value("v", 0.0);
  o.behavior = ConstantVelocity{};
  if (j.contains("behavior")) {
    const auto & b = j.at("behavior");
    const std::string type = b.value("type", "ConstantVelocity");
    if (type == "LaneChangeAt") {
      o.behavior = LaneChangeAt{b.value("t_c", 0.0), b.value("target_lane", 1)};
    } else if (type != "ConstantVelocity") {
      throw Error("parse-error", "unknown OV behavior '" + type + "'");
    }
  }
}

}  // namespace falsify::sim

namespace falsify::sut {

inline void to_json(nlohmann::json & j, const SafetyDistances & s)
{
  j = {{"x_f_safe", s.x_f_safe}, {"w_f_safe", s.w_f_safe}};
}

inline void from_json(const nlohmann::json & j, SafetyDistances & s)
{
  const SafetyDistances d;
  s.x_f_safe = j.value("x_f_safe", d.x_f_safe);
  s.w_f_safe = j.value("w_f_safe", d.w_f_safe);
}

inline void to_json(nlohmann::json & j, const MpcConfig & c)
{
  j = {{"horizon", c.horizon},
       {"input_blocks", c.input_blocks},
       {"q_w", c.q_w},
       {"q_v", c.q_v},
       {"r_psi", c.r_psi},
       {"r_dv", c.r_dv},
       {"penalty", c.penalty},
       {"v_ref", c.v_ref},
       {"v_min", c.v_min},
       {"v_max", c.v_max},
       {"psi_max", c.psi_max},
       {"accel_max", c.accel_max},
       {"w_f_min", c.w_f_min},
       {"w_f_max", c.w_f_max},
       {"pso", c.pso},
       {"polish_evaluations", c.polish_evaluations},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json & j, MpcConfig & c)
{
  const MpcConfig d;
  c.horizon = j.value("horizon", d.horizon);
  c.input_blocks = j.value("input_blocks", d.input_blocks);
  c.q_w = j.value("q_w", d.q_w);
  c.q_v = j.value("q_v", d.q_v);
  c.r_psi = j.value("r_psi", d.r_psi);
  c.r_dv = j.value("r_dv", d.r_dv);
  c.penalty = j.value("penalty", d.penalty);
  c.v_ref = j.value("v_ref", d.v_ref);
  c.v_min = j.value("v_min", d.v_min);
  c.v_max = j.value("v_max", d.v_max);
  c.psi_max = j.value("psi_max", d.psi_max);
  c.accel_max = j.value("accel_max", d.accel_max);
  c.w_f_min = j.value("w_f_min", d.w_f_min);
  c.w_f_max = j.value("w_f_max", d.w_f_max);
  c.pso = j.value("pso", d.pso);
  c.polish_evaluations = j.value("polish_evaluations", d.polish_evaluations);
  c.seed = j.value("seed", d.seed);
}

}  // namespace falsify::sut

namespace falsify::sim {

inline void to_json(nlohmann::json & j, const ScenarioConfig & c)
{
  j = {{"road", c.road},
       {"sv_init",
        {{"x_f", c.sv_init.x_f}, {"w_f", c.sv_init.w_f}, {"theta", c.sv_init.theta}, {"v", c.sv_v0}}},
       {"geometry", c.geometry},
       {"ovs", c.ovs},
       {"safety", c.safety},
       {"t_exp", c.t_exp},
       {"dt", c.dt},
       {"sut", c.sut}};
}

inline void from_json(const nlohmann::json & j, ScenarioConfig & c)
{
  const ScenarioConfig d;
  c.road = j.value("road", d.road);
  c.geometry = j.value("geometry", d.geometry);
  c.ovs = j.value("ovs", d.ovs);
  c.safety = j.value("safety", d.safety);
  c.t_exp = j.value("t_exp", d.t_exp);
  c.dt = j.value("dt", d.dt);
  c.sut = j.value("sut", d.sut);
  c.sv_init = d.sv_init;
  c.sv_v0 = d.sv_v0;
  if (j.contains("sv_init")) {
    from_json(j.at("sv_init"), c.sv_init);
    c.sv_v0 = j.at("sv_init").value("v", d.sv_v0);
  }
}

}  // namespace falsify::sim

namespace falsify {

inline void to_json(nlohmann::json & j, const ConstraintTerm & t)
{
  j = {{"name", t.name}, {"coeff", t.coeff}};
}

inline void from_json(const nlohmann::json & j, ConstraintTerm & t)
{
  t.name = j.at("name").get<std::string>();
  t.coeff = j.value("coeff", 1.0);
}

inline void to_json(nlohmann::json & j, const LinearConstraint & c)
{
  j = {{"terms", c.terms}, {"op", c.op}, {"rhs", c.rhs}};
}

inline void from_json(const nlohmann::json & j, LinearConstraint & c)
{
  c.terms = j.at("terms").get<std::vector<ConstraintTerm>>();
  c.op = j.value("op", std::string(">"));
  c.rhs = j.value("rhs", 0.0);
}

inline void to_json(nlohmann::json & j, const LogicalScenario & s)
{
  j = {{"id", s.id},
       {"scenario_template", s.scenario_template},
       {"poi_names", s.poi_names},
       {"lower", s.lower},
       {"upper", s.upper},
       {"extra_constraints", s.extra_constraints},
       {"n_max", s.n_max},
       {"n_init", s.n_init}};
}

inline void from_json(const nlohmann::json & j, LogicalScenario & s)
{
  s.id = j.at("id").get<std::string>();
  s.scenario_template = j.value("scenario_template", sim::ScenarioConfig{});
  s.poi_names = j.at("poi_names").get<std::vector<std::string>>();
  s.lower = j.at("lower").get<glis::Vector>();
  s.upper = j.at("upper").get<glis::Vector>();
  s.extra_constraints = j.value("extra_constraints", std::vector<LinearConstraint>{});
  s.n_max = j.value("n_max", 50);
  s.n_init = j.value("n_init", (s.n_max + 3) / 4);
}

inline void to_json(nlohmann::json & j, const OvCriticality & c)
{
  j = {{"collided", c.collided}, {"d_xf_critical", c.d_xf_critical}, {"d_wf_critical", c.d_wf_critical}};
}

inline void from_json(const nlohmann::json & j, OvCriticality & c)
{
  c.collided = j.at("collided").get<bool>();
  c.d_xf_critical = j.at("d_xf_critical").get<double>();
  c.d_wf_critical = j.at("d_wf_critical").get<double>();
}

inline void to_json(nlohmann::json & j, const CriticalityReport & r)
{
  j = {{"f_value", r.f_value},
       {"per_ov", r.per_ov},
       {"collided_any", r.collided_any},
       {"collision_steps", r.collision_steps}};
}

inline void from_json(const nlohmann::json & j, CriticalityReport & r)
{
  r.f_value = j.at("f_value").get<double>();
  r.per_ov = j.at("per_ov").get<std::vector<OvCriticality>>();
  r.collided_any = j.at("collided_any").get<bool>();
  r.collision_steps = j.at("collision_steps").get<std::vector<std::vector<std::size_t>>>();
}

inline void to_json(nlohmann::json & j, const SampleRecord & s)
{
  j = {{"x", s.x}, {"f", s.f}, {"is_critical", s.is_critical}, {"report", s.report}};
}

inline void from_json(const nlohmann::json & j, SampleRecord & s)
{
  s.x = j.at("x").get<glis::Vector>();
  s.f = j.at("f").get<double>();
  s.is_critical = j.at("is_critical").get<bool>();
  s.report = j.at("report").get<CriticalityReport>();
}

inline void to_json(nlohmann::json & j, const CampaignResult & r)
{
  j = {{"scenario", r.scenario_id}, {"method", to_string(r.method)}, {"seed", r.seed},
       {"n_init", r.n_init},        {"samples", r.samples},           {"s_critical", r.s_critical},
       {"best", r.best}};
  if (r.wall_time) {
    j["wall_time"] = *r.wall_time;
  }
}

inline void from_json(const nlohmann::json & j, CampaignResult & r)
{
  r.scenario_id = j.at("scenario").get<std::string>();
  r.method = method_from_string(j.at("method").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_init = j.at("n_init").get<int>();
  r.samples = j.at("samples").get<std::vector<SampleRecord>>();
  r.s_critical = j.at("s_critical").get<std::vector<glis::Vector>>();
  r.best = j.at("best").get<std::size_t>();
  r.wall_time.reset();
  if (j.contains("wall_time")) {
    r.wall_time = j.at("wall_time").get<double>();
  }
}

namespace io {

inline nlohmann::json read_json(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error("invalid-argument", "cannot open " + path.string());
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception & e) {
    throw Error("parse-error", path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw Error("invalid-argument", "cannot write " + path.string());
  }
}

inline std::string dump(const nlohmann::json & j) { return j.dump(2) + "\n"; }

template <typename T>
T parse_as(const nlohmann::json & j, const std::string & what)
{
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception & e) {
    throw Error("parse-error", what + ": " + e.what());
  }
}

inline void save_result(const std::filesystem::path & path, const CampaignResult & result)
{
  write_text(path, dump(nlohmann::json(result)));
}

/// Loads a result and, when the scenario is given, re-validates every sample against it.
inline CampaignResult load_result(const std::filesystem::path & path,
                                  const LogicalScenario * scenario = nullptr)
{
  auto result = parse_as<CampaignResult>(read_json(path), path.string());
  if (scenario != nullptr) {
    validate_result(result, *scenario);
  }
  return result;
}

inline LogicalScenario load_scenario(const std::filesystem::path & path)
{
  auto s = parse_as<LogicalScenario>(read_json(path), path.string());
  s.validate();
  return s;
}

/// results/<scenario>/<method>/<seed>.json
inline std::filesystem::path result_path(const std::filesystem::path & root,
                                         const CampaignResult & r)
{
  return root / r.scenario_id / to_string(r.method) / (std::to_string(r.seed) + ".json");
}

}  // namespace io

}  // namespace falsify
