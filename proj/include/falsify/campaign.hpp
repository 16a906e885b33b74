#pragma once

#include "falsify/criticality.hpp"
#include "falsify/error.hpp"
#include "falsify/glis/glis.hpp"
#include "falsify/sim/scenario.hpp"
#include "falsify/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace falsify {

struct ConstraintTerm
{
  std::string name;
  double coeff = 1.0;

  bool operator==(const ConstraintTerm &) const = default;
};

/// sum(coeff * poi) <op> rhs, with op one of ">", ">=", "<", "<=".
struct LinearConstraint
{
  std::vector<ConstraintTerm> terms;
  std::string op = ">";
  double rhs = 0.0;

  bool operator==(const LinearConstraint &) const = default;
};

struct LogicalScenario
{
  std::string id;
  sim::ScenarioConfig scenario_template;
  std::vector<std::string> poi_names;
  glis::Vector lower;
  glis::Vector upper;
  std::vector<LinearConstraint> extra_constraints;
  int n_max = 50;
  int n_init = 13;

  std::size_t dim() const { return poi_names.size(); }

  std::size_t poi_index(const std::string & name) const
  {
    const auto it = std::find(poi_names.begin(), poi_names.end(), name);
    if (it == poi_names.end()) {
      throw Error("invalid-config", "scenario " + id + " has no parameter '" + name + "'");
    }
    return static_cast<std::size_t>(it - poi_names.begin());
  }

  double lhs(const LinearConstraint & c, glis::VectorView x) const
  {
    double value = 0.0;
    for (const auto & term : c.terms) {
      value += term.coeff * x[poi_index(term.name)];
    }
    return value;
  }

  bool satisfies(const LinearConstraint & c, glis::VectorView x) const
  {
    const double v = lhs(c, x);
    if (c.op == ">") {
      return v > c.rhs;
    }
    if (c.op == ">=") {
      return v >= c.rhs;
    }
    if (c.op == "<") {
      return v < c.rhs;
    }
    return v <= c.rhs;
  }

  /// Distance of the constraint expression from its right-hand side when violated.
  double violation(const LinearConstraint & c, glis::VectorView x) const
  {
    if (satisfies(c, x)) {
      return 0.0;
    }
    return std::abs(lhs(c, x) - c.rhs);
  }

  bool in_domain(glis::VectorView x) const
  {
    if (x.size() != dim()) {
      return false;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) {
        return false;
      }
    }
    return std::all_of(extra_constraints.begin(), extra_constraints.end(),
                       [&](const LinearConstraint & c) { return satisfies(c, x); });
  }

  void validate() const
  {
    if (poi_names.empty() || lower.size() != dim() || upper.size() != dim()) {
      throw Error("invalid-config", "scenario " + id + ": poi_names, lower and upper differ in size");
    }
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw Error("invalid-config", "scenario " + id + ": lower must be below upper");
      }
    }
    for (const auto & c : extra_constraints) {
      if (c.op != ">" && c.op != ">=" && c.op != "<" && c.op != "<=") {
        throw Error("invalid-config", "unknown constraint operator '" + c.op + "'");
      }
      for (const auto & term : c.terms) {
        poi_index(term.name);
      }
    }
    glis::GlisConfig g;
    g.n_max = n_max;
    g.n_init = n_init;
    g.validate();
    scenario_template.validate();
  }

  bool operator==(const LogicalScenario &) const = default;
};

namespace detail {

inline std::optional<std::size_t> ov_suffix(const std::string & name, const std::string & prefix)
{
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) {
    return std::nullopt;
  }
  const std::string digits = name.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  const std::size_t i = std::stoul(digits);
  if (i == 0) {
    return std::nullopt;
  }
  return i - 1;
}

}  // namespace detail

/// Concrete scenario for a parameter vector. Recognized parameters:
/// x0_f<i>, w0_f<i>, v0_<i> (OV i, 1-based) and t_c (first lane-changing OV).
inline sim::ScenarioConfig instantiate(const LogicalScenario & scenario, glis::VectorView x)
{
  if (x.size() != scenario.dim()) {
    throw Error("invalid-argument", "expected " + std::to_string(scenario.dim()) +
                                      " parameters for scenario " + scenario.id);
  }
  sim::ScenarioConfig config = scenario.scenario_template;
  auto ov = [&](std::size_t i) -> sim::OvSpec & {
    if (i >= config.ovs.size()) {
      throw Error("invalid-config", "parameter refers to a missing OV");
    }
    return config.ovs[i];
  };
  for (std::size_t p = 0; p < x.size(); ++p) {
    const std::string & name = scenario.poi_names[p];
    if (const auto i = detail::ov_suffix(name, "x0_f")) {
      ov(*i).init.x_f = x[p];
    } else if (const auto i = detail::ov_suffix(name, "w0_f")) {
      ov(*i).init.w_f = x[p];
    } else if (const auto i = detail::ov_suffix(name, "v0_")) {
      ov(*i).v0 = x[p];
    } else if (name == "t_c") {
      auto it = std::find_if(config.ovs.begin(), config.ovs.end(), [](const sim::OvSpec & o) {
        return std::holds_alternative<sim::LaneChangeAt>(o.behavior);
      });
      if (it == config.ovs.end()) {
        throw Error("invalid-config", "t_c given but no OV changes lane");
      }
      std::get<sim::LaneChangeAt>(it->behavior).t_c = x[p];
    } else {
      throw Error("invalid-config", "unknown parameter name '" + name + "'");
    }
  }
  return config;
}

namespace detail {

inline sim::ScenarioConfig base_template()
{
  sim::ScenarioConfig c;
  c.road = {-1.5, 4.5, 2};
  c.geometry = {4.5, 1.8};
  c.safety = {10.0, 3.0};
  c.sv_init = {0.0, 0.0, 0.0};
  c.sv_v0 = 55.0;
  c.t_exp = 30.0;
  c.dt = 0.05;
  c.sut.v_ref = c.sv_v0;
  return c;
}

inline LinearConstraint difference_above(const std::string & a, const std::string & b, double rhs)
{
  return {{{a, 1.0}, {b, -1.0}}, ">", rhs};
}

inline LogicalScenario lane_scenario(std::string id, const std::vector<double> & lateral,
                                     glis::Vector lower, glis::Vector upper, int n_max)
{
  LogicalScenario s;
  s.id = std::move(id);
  s.scenario_template = base_template();
  for (std::size_t i = 0; i < lateral.size(); ++i) {
    s.scenario_template.ovs.push_back({{0.0, lateral[i], 0.0}, 30.0, sim::ConstantVelocity{}});
    s.poi_names.push_back("x0_f" + std::to_string(i + 1));
    s.poi_names.push_back("v0_" + std::to_string(i + 1));
  }
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  s.n_max = n_max;
  s.n_init = (n_max + 3) / 4;
  return s;
}

}  // namespace detail

inline std::vector<LogicalScenario> builtin_scenarios()
{
  using detail::difference_above;
  const double length = 4.5;
  std::vector<LogicalScenario> out;

  out.push_back(detail::lane_scenario("ls1-test1", {0.0}, {5, 30}, {50, 80}, 50));

  auto t2 = detail::lane_scenario("ls1-test2", {0.0, 3.0, 3.0}, {15, 30, 0, 10, 10, 30},
                                  {50, 80, 100, 80, 100, 80}, 100);
  t2.extra_constraints = {difference_above("x0_f3", "x0_f2", length),
                          difference_above("v0_3", "v0_2", 0.0)};
  out.push_back(std::move(t2));

  auto t3 = detail::lane_scenario("ls1-test3", {0.0, 0.0, 3.0, 3.0, 3.0},
                                  {15, 30, 0, 10, 0, 10, 10, 10, 20, 10},
                                  {50, 80, 100, 80, 100, 80, 100, 80, 100, 80}, 100);
  t3.extra_constraints = {
    difference_above("x0_f2", "x0_f1", length), difference_above("x0_f4", "x0_f3", length),
    difference_above("x0_f5", "x0_f4", length), difference_above("v0_2", "v0_1", 0.0),
    difference_above("v0_4", "v0_3", 0.0),      difference_above("v0_5", "v0_4", 0.0)};
  out.push_back(std::move(t3));

  LogicalScenario ls2;
  ls2.id = "ls2-test1";
  ls2.scenario_template = detail::base_template();
  ls2.scenario_template.ovs.push_back(
    {{0.0, 0.0, 0.0}, 30.0, sim::LaneChangeAt{.t_c = 0.0, .target_lane = 1}});
  ls2.poi_names = {"x0_f1", "v0_1", "t_c"};
  ls2.lower = {11, 30, 0};
  ls2.upper = {50, 80, 40};
  ls2.n_max = 100;
  ls2.n_init = 25;
  out.push_back(std::move(ls2));
  return out;
}

inline std::optional<LogicalScenario> find_builtin(const std::string & id)
{
  for (auto & s : builtin_scenarios()) {
    if (s.id == id) {
      return s;
    }
  }
  return std::nullopt;
}

enum class Method { Glis, Lhs };

inline std::string to_string(Method m) { return m == Method::Glis ? "GLIS" : "LHS"; }

inline Method method_from_string(const std::string & s)
{
  if (s == "GLIS" || s == "glis") {
    return Method::Glis;
  }
  if (s == "LHS" || s == "lhs") {
    return Method::Lhs;
  }
  throw Error("parse-error", "unknown method '" + s + "'");
}

struct SampleRecord
{
  glis::Vector x;
  double f = 0.0;
  bool is_critical = false;
  CriticalityReport report;

  bool operator==(const SampleRecord &) const = default;
};

struct CampaignResult
{
  std::string scenario_id;
  Method method = Method::Glis;
  std::uint64_t seed = 0;
  int n_init = 0;
  std::vector<SampleRecord> samples;
  std::vector<glis::Vector> s_critical;
  /// Index into `samples` of the minimum-f sample.
  std::size_t best = 0;
  std::optional<double> wall_time;

  const SampleRecord & best_sample() const { return samples.at(best); }

  bool operator==(const CampaignResult &) const = default;
};

struct CampaignOptions
{
  std::optional<double> delta;
  /// Observer of every surrogate fit (GLIS only).
  glis::FitObserver on_fit;
  bool record_wall_time = false;
};

inline std::string format_vector(glis::VectorView x)
{
  std::ostringstream out;
  out.precision(17);
  out << '[';
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << (i ? ", " : "") << x[i];
  }
  out << ']';
  return out.str();
}

/// Simulates one concrete scene with a fresh reference SUT and scores it.
inline CriticalityReport simulate_scene(const LogicalScenario & scenario, glis::VectorView x,
                                        sim::Trace * trace_out = nullptr)
{
  try {
    const sim::ScenarioConfig config = instantiate(scenario, x);
    sim::Trace trace = sim::run_scenario(config);
    CriticalityReport report = evaluate(trace, config.geometry, config.safety);
    if (trace_out != nullptr) {
      *trace_out = std::move(trace);
    }
    return report;
  } catch (const Error & e) {
    throw Error(e.code(), std::string(e.what()) + " (x_scene = " + format_vector(x) + ")");
  }
}

inline glis::OptProblem make_problem(const LogicalScenario & scenario,
                                     std::function<double(glis::VectorView)> objective)
{
  glis::OptProblem p;
  p.lower = scenario.lower;
  p.upper = scenario.upper;
  if (!scenario.extra_constraints.empty()) {
    p.feasible = [&scenario](glis::VectorView x) {
      return std::all_of(scenario.extra_constraints.begin(), scenario.extra_constraints.end(),
                         [&](const LinearConstraint & c) { return scenario.satisfies(c, x); });
    };
    p.violation = [&scenario](glis::VectorView x) {
      double total = 0.0;
      for (const auto & c : scenario.extra_constraints) {
        total += scenario.violation(c, x);
      }
      return total;
    };
  }
  p.objective = std::move(objective);
  return p;
}

inline CampaignResult run_campaign(const LogicalScenario & scenario, Method method,
                                   std::uint64_t seed, const CampaignOptions & options = {})
{
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();

  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(scenario.n_max));
  const glis::OptProblem problem =
    make_problem(scenario, [&](glis::VectorView x) {
      CriticalityReport report = simulate_scene(scenario, x);
      const double f = report.f_value;
      records.push_back({glis::Vector(x.begin(), x.end()), f, is_critical(report), std::move(report)});
      return f;
    });

  glis::GlisConfig config;
  config.n_max = scenario.n_max;
  config.n_init = scenario.n_init;
  config.seed = seed;
  if (options.delta) {
    config.delta = *options.delta;
  }
  const glis::GlisResult run = method == Method::Glis ? glis_run(problem, config, options.on_fit)
                                                      : lhs_run(problem, config);

  CampaignResult result;
  result.scenario_id = scenario.id;
  result.method = method;
  result.seed = seed;
  result.n_init = scenario.n_init;
  result.samples = std::move(records);
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    // The optimizer reports x in problem coordinates; keep its exact values.
    result.samples[i].x = run.samples[i].x;
    if (result.samples[i].is_critical) {
      result.s_critical.push_back(result.samples[i].x);
    }
    if (result.samples[i].f < result.samples[result.best].f) {
      result.best = i;
    }
  }
  if (options.record_wall_time) {
    result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

/// Re-checks a loaded result: sizes, bounds, constraints, critical set and best index.
inline void validate_result(const CampaignResult & result, const LogicalScenario & scenario)
{
  if (result.samples.size() != static_cast<std::size_t>(scenario.n_max)) {
    throw Error("invalid-state", "result has " + std::to_string(result.samples.size()) +
                                   " samples, scenario budget is " + std::to_string(scenario.n_max));
  }
  std::vector<glis::Vector> critical;
  std::size_t best = 0;
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    const auto & s = result.samples[i];
    if (!scenario.in_domain(s.x)) {
      throw Error("invalid-state", "sample " + std::to_string(i) + " " + format_vector(s.x) +
                                     " violates the scenario bounds or constraints");
    }
    if (s.is_critical != s.report.collided_any) {
      throw Error("invalid-state", "sample " + std::to_string(i) + " critical flag mismatch");
    }
    if (s.is_critical) {
      critical.push_back(s.x);
    }
    if (s.f < result.samples[best].f) {
      best = i;
    }
  }
  if (critical != result.s_critical || (!result.samples.empty() && best != result.best)) {
    throw Error("invalid-state", "critical set or best sample inconsistent with samples");
  }
}

struct MethodStats
{
  Method method = Method::Glis;
  std::vector<std::uint64_t> seeds;
  std::vector<double> critical_counts;
  stats::MeanCi summary;
};

struct ComparisonStats
{
  std::string scenario_id;
  std::vector<MethodStats> methods;
  /// One-sided rank-sum test that the first method finds more critical scenes than the second.
  std::optional<stats::RankSumResult> rank_sum;
  std::vector<CampaignResult> results;
};

struct MonteCarloOptions
{
  CampaignOptions campaign;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Called once per finished run, in completion order (serialized).
  std::function<void(const CampaignResult &)> on_result;
};

/// Runs every method `runs` times with seeds base_seed + i. Runs execute
/// concurrently; results are ordered by (method, run) regardless.
inline ComparisonStats monte_carlo(const LogicalScenario & scenario,
                                   const std::vector<Method> & methods, int runs,
                                   std::uint64_t base_seed, const MonteCarloOptions & options = {})
{
  if (runs < 2) {
    throw Error("invalid-argument", "monte_carlo needs at least 2 runs");
  }
  if (methods.empty()) {
    throw Error("invalid-argument", "monte_carlo needs at least one method");
  }
  scenario.validate();
  const std::size_t per_method = static_cast<std::size_t>(runs);
  const std::size_t jobs = methods.size() * per_method;
  std::vector<std::optional<CampaignResult>> slots(jobs);

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(jobs));
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      {
        std::lock_guard lock(mutex);
        if (failure) {
          return;
        }
      }
      try {
        CampaignResult r = run_campaign(scenario, methods[j / per_method],
                                        base_seed + j % per_method, options.campaign);
        std::lock_guard lock(mutex);
        if (options.on_result) {
          options.on_result(r);
        }
        slots[j] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  ComparisonStats out;
  out.scenario_id = scenario.id;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodStats ms;
    ms.method = methods[m];
    for (std::size_t i = 0; i < per_method; ++i) {
      CampaignResult & r = *slots[m * per_method + i];
      ms.seeds.push_back(r.seed);
      ms.critical_counts.push_back(static_cast<double>(r.s_critical.size()));
      out.results.push_back(std::move(r));
    }
    ms.summary = stats::mean_ci95(ms.critical_counts);
    out.methods.push_back(std::move(ms));
  }
  if (out.methods.size() >= 2) {
    out.rank_sum =
      stats::rank_sum_greater(out.methods[0].critical_counts, out.methods[1].critical_counts);
  }
  return out;
}

}  // namespace falsify
