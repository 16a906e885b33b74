#include "falsify/campaign.hpp"
#include "falsify/glis/benchmarks.hpp"
#include "falsify/io.hpp"
#include "falsify/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace falsify;

namespace {

/// Bad command-line input that the parser itself cannot catch (exit 1).
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct Options
{
  std::string scenario;
  std::uint64_t seed = 0;
  int runs = 20;
  std::string out = "results";
  std::optional<double> delta;
  std::optional<int> n_max;
  std::optional<double> dt;
  std::string x;
  unsigned threads = 0;
  bool wall_time = false;
  std::vector<std::string> inputs;
};

LogicalScenario resolve_scenario(const Options & o)
{
  LogicalScenario s;
  if (auto builtin = find_builtin(o.scenario)) {
    s = std::move(*builtin);
  } else if (fs::is_regular_file(o.scenario)) {
    s = io::parse_as<LogicalScenario>(io::read_json(o.scenario), o.scenario);
  } else {
    throw UsageError("unknown scenario '" + o.scenario +
                     "' (expected ls1-test1, ls1-test2, ls1-test3, ls2-test1 or a JSON file)");
  }
  if (o.n_max) {
    s.n_max = *o.n_max;
    s.n_init = (*o.n_max + 3) / 4;
  }
  if (o.dt) {
    s.scenario_template.dt = *o.dt;
  }
  s.validate();
  return s;
}

CampaignOptions campaign_options(const Options & o)
{
  CampaignOptions c;
  c.delta = o.delta;
  c.record_wall_time = o.wall_time;
  return c;
}

glis::Vector parse_x(const std::string & text, const LogicalScenario & s)
{
  glis::Vector x;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      x.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
    } catch (const std::logic_error &) {
      throw UsageError("--x: '" + item + "' is not a number");
    }
  }
  if (x.size() != s.dim()) {
    throw UsageError("--x needs " + std::to_string(s.dim()) + " comma-separated values for " + s.id);
  }
  return x;
}

void print_campaign(const CampaignResult & r, const LogicalScenario & s, const fs::path & json)
{
  std::cout << "scenario " << r.scenario_id << "  method " << to_string(r.method) << "  seed "
            << r.seed << "  experiments " << r.samples.size() << " (initial " << r.n_init << ")\n";
  std::cout << "critical scenes: " << r.s_critical.size() << '\n';
  std::cout << "best f = " << report::fmt(r.best_sample().f) << " at " << format_vector(r.best_sample().x)
            << '\n';
  std::cout << report::critical_listing(r);
  std::cout << "parameters: ";
  for (std::size_t i = 0; i < s.poi_names.size(); ++i) {
    std::cout << (i ? ", " : "") << s.poi_names[i];
  }
  std::cout << "\nwrote " << json.string() << '\n';
}

int run_single(const Options & o, Method method)
{
  const LogicalScenario s = resolve_scenario(o);
  const CampaignResult r = run_campaign(s, method, o.seed, campaign_options(o));
  const auto written = report::write_reports({r}, o.out, s.poi_names);
  print_campaign(r, s, written.front());
  return 0;
}

int run_compare(const Options & o)
{
  const LogicalScenario s = resolve_scenario(o);
  MonteCarloOptions mc;
  mc.campaign = campaign_options(o);
  mc.threads = o.threads;
  mc.on_result = [](const CampaignResult & r) {
    std::cerr << "finished " << to_string(r.method) << " seed " << r.seed << ": "
              << r.s_critical.size() << " critical\n";
  };
  const ComparisonStats stats = monte_carlo(s, {Method::Glis, Method::Lhs}, o.runs, o.seed, mc);
  report::write_reports(stats.results, o.out, s.poi_names);
  const fs::path summary = fs::path(o.out) / s.id / "comparison.json";
  io::write_text(summary, io::dump(report::comparison_json(stats)));
  std::cout << report::comparison_table(stats);
  std::cout << "wrote " << summary.string() << '\n';
  return 0;
}

int run_replay(const Options & o)
{
  const LogicalScenario s = resolve_scenario(o);
  if (o.x.empty()) {
    throw UsageError("replay needs --x");
  }
  const glis::Vector x = parse_x(o.x, s);
  if (!s.in_domain(x)) {
    std::cerr << "warning: " << format_vector(x) << " is outside the scenario's domain\n";
  }
  sim::Trace trace;
  const CriticalityReport rep = simulate_scene(s, x, &trace);
  const fs::path csv = fs::path(o.out) / s.id / "replay.csv";
  std::ostringstream text;
  sim::write_trace_csv(text, trace);
  io::write_text(csv, text.str());

  std::cout << "x_scene " << format_vector(x) << '\n';
  std::cout << "f = " << report::fmt(rep.f_value, "%.10g") << '\n';
  std::cout << "critical: " << (is_critical(rep) ? "yes" : "no") << '\n';
  for (std::size_t i = 0; i < rep.per_ov.size(); ++i) {
    if (!rep.collision_steps[i].empty()) {
      std::cout << "OV" << i + 1 << " collides from t = "
                << report::fmt(trace.times[rep.collision_steps[i].front()]) << " s ("
                << rep.collision_steps[i].size() << " steps)\n";
    }
  }
  std::cout << "wrote " << csv.string() << '\n';
  return 0;
}

void collect_results(const fs::path & p, std::vector<fs::path> & out)
{
  if (fs::is_directory(p)) {
    for (const auto & e : fs::recursive_directory_iterator(p)) {
      const auto stem = e.path().stem().string();
      if (e.is_regular_file() && e.path().extension() == ".json" && !stem.empty() &&
          std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
        out.push_back(e.path());
      }
    }
  } else if (fs::is_regular_file(p)) {
    out.push_back(p);
  } else {
    throw Error("invalid-argument", "no such file or directory: " + p.string());
  }
}

int run_report(const Options & o)
{
  std::vector<fs::path> files;
  for (const auto & in : o.inputs) {
    collect_results(in, files);
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error("invalid-argument", "no result files found");
  }
  std::vector<CampaignResult> results;
  for (const auto & f : files) {
    CampaignResult r = io::load_result(f);
    std::vector<std::string> names;
    if (auto scenario = find_builtin(r.scenario_id)) {
      // Budgets may have been overridden with --n-max; bounds and constraints still apply.
      scenario->n_max = static_cast<int>(r.samples.size());
      scenario->n_init = r.n_init;
      validate_result(r, *scenario);
      names = scenario->poi_names;
    }
    report::write_reports({r}, o.out, names);
    results.push_back(std::move(r));
  }
  for (const auto & r : results) {
    std::cout << r.scenario_id << ' ' << to_string(r.method) << " seed " << r.seed << ": "
              << r.s_critical.size() << " critical, best f " << report::fmt(r.best_sample().f)
              << '\n'
              << report::critical_listing(r);
  }
  std::cout << "wrote " << 3 * results.size() << " files under " << o.out << '\n';
  return 0;
}

int run_bench(const Options & o)
{
  std::cout << "problem          runs  success  median best f  seconds\n";
  for (const auto & b : glis::benchmarks()) {
    glis::GlisConfig config;
    config.n_max = b.n_max;
    config.n_init = b.n_init;
    if (o.delta) {
      config.delta = *o.delta;
    }
    int success = 0;
    std::vector<double> best;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < o.runs; ++i) {
      config.seed = o.seed + static_cast<std::uint64_t>(i);
      const auto r = glis::glis_run(b.problem, config);
      double err = 0.0;
      for (std::size_t d = 0; d < b.x_star.size(); ++d) {
        err = std::max(err, std::abs(r.best.x[d] - b.x_star[d]));
      }
      success += err <= b.x_tolerance ? 1 : 0;
      best.push_back(r.best.f);
    }
    const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::sort(best.begin(), best.end());
    std::string name = b.name;
    name.resize(16, ' ');
    std::cout << name << ' ' << o.runs << "    " << success << '/' << o.runs << "    "
              << report::fmt(best[best.size() / 2], "%.3e") << "      " << report::fmt(seconds, "%.2f")
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Scenario falsification of a lane-keeping MPC with GLIS active learning"};
  app.name("falsify");
  app.require_subcommand(1);
  app.fallthrough(false);
  Options o;

  const auto add_scenario = [&](CLI::App * sub) {
    sub->add_option("scenario", o.scenario, "builtin id (ls1-test1, ls1-test2, ls1-test3, ls2-test1) or JSON file")
      ->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--dt", o.dt, "simulation step [s] (overrides the scenario)");
  };
  const auto add_campaign = [&](CLI::App * sub) {
    add_scenario(sub);
    sub->add_option("--seed", o.seed, "seed (base seed for compare)")->capture_default_str();
    sub->add_option("--delta", o.delta, "GLIS exploration weight (default 2)");
    sub->add_option("--n-max", o.n_max, "experiment budget; the initial design is ceil(n_max/4)")
      ->check(CLI::Range(1, 1000000));
    sub->add_flag("--wall-time", o.wall_time, "record wall-clock time in result files");
  };

  auto * falsify = app.add_subcommand("falsify", "run one GLIS campaign");
  add_campaign(falsify);
  auto * baseline = app.add_subcommand("baseline", "run one Latin-hypercube baseline campaign");
  add_campaign(baseline);
  auto * compare = app.add_subcommand("compare", "Monte Carlo comparison of GLIS and LHS");
  add_campaign(compare);
  compare->add_option("--runs", o.runs, "runs per method")->check(CLI::Range(2, 100000))->capture_default_str();
  compare->add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
  auto * replay = app.add_subcommand("replay", "simulate one concrete scene and write its trace CSV");
  add_scenario(replay);
  replay->add_option("--x", o.x, "comma-separated parameter vector, e.g. 5,30.89")->required();
  auto * rep = app.add_subcommand("report", "render JSON/CSV/SVG files from stored results");
  rep->add_option("results", o.inputs, "result files or directories")->required();
  rep->add_option("--out", o.out, "output directory")->capture_default_str();
  auto * bench = app.add_subcommand("bench-opt", "GLIS self-test on synthetic benchmarks");
  bench->add_option("--seed", o.seed, "base seed")->capture_default_str();
  bench->add_option("--runs", o.runs, "runs per problem")->check(CLI::Range(1, 100000))->capture_default_str();
  bench->add_option("--delta", o.delta, "GLIS exploration weight (default 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion &) {
    return 0;
  } catch (const CLI::ParseError & e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    if (falsify->parsed()) {
      return run_single(o, Method::Glis);
    }
    if (baseline->parsed()) {
      return run_single(o, Method::Lhs);
    }
    if (compare->parsed()) {
      return run_compare(o);
    }
    if (replay->parsed()) {
      return run_replay(o);
    }
    if (rep->parsed()) {
      return run_report(o);
    }
    return run_bench(o);
  } catch (const UsageError & e) {
    std::cerr << "error: " << e.what() << "\n\n";
    std::cerr << app.get_subcommands().front()->help();
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
