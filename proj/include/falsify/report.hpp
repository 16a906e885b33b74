#pragma once

#include "falsify/campaign.hpp"
#include "falsify/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace falsify::report {

inline std::vector<double> best_so_far(const CampaignResult & r)
{
  std::vector<double> out;
  out.reserve(r.samples.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto & s : r.samples) {
    best = std::min(best, s.f);
    out.push_back(best);
  }
  return out;
}

inline std::string fmt(double v, const char * spec = "%.6g")
{
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// One row per sample: index (1-based), parameters, f, critical flag, best so far.
inline std::string samples_csv(const CampaignResult & r, const std::vector<std::string> & names = {})
{
  std::ostringstream out;
  const std::size_t n = r.samples.empty() ? 0 : r.samples.front().x.size();
  out << "iter";
  for (std::size_t i = 0; i < n; ++i) {
    out << ',' << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
  }
  out << ",f,is_critical,best_so_far\n";
  const auto best = best_so_far(r);
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    const auto & s = r.samples[k];
    out << k + 1;
    for (const double v : s.x) {
      out << ',' << fmt(v, "%.17g");
    }
    out << ',' << fmt(s.f, "%.17g") << ',' << (s.is_critical ? 1 : 0) << ','
        << fmt(best[k], "%.17g") << '\n';
  }
  return out.str();
}

/// Best-so-far objective versus evaluation index, with a dashed line after
/// the last initial-design sample.
inline std::string best_so_far_svg(const CampaignResult & r)
{
  constexpr double width = 640;
  constexpr double height = 400;
  constexpr double left = 70;
  constexpr double right = 20;
  constexpr double top = 30;
  constexpr double bottom = 50;
  const auto best = best_so_far(r);
  const std::size_t n = best.size();
  double lo = n ? *std::min_element(best.begin(), best.end()) : 0.0;
  double hi = n ? *std::max_element(best.begin(), best.end()) : 1.0;
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  const auto px = [&](double k) {
    return left + (n > 1 ? (k - 1) / static_cast<double>(n - 1) : 0.5) * (width - left - right);
  };
  const auto py = [&](double f) { return top + (hi - f) / (hi - lo) * (height - top - bottom); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
      << r.scenario_id << ' ' << to_string(r.method) << " seed " << r.seed << "</text>\n";
  out << "  <line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">experiment</text>\n";
  out << "  <text x=\"14\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << height / 2 << ")\" text-anchor=\"middle\">best f</text>\n";
  out << "  <text x=\"" << left - 4 << "\" y=\"" << py(hi) + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(hi) << "</text>\n";
  out << "  <text x=\"" << left - 4 << "\" y=\"" << py(lo) + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(lo) << "</text>\n";
  if (r.n_init > 0 && static_cast<std::size_t>(r.n_init) <= n) {
    const double x = px(r.n_init);
    out << "  <line class=\"n-init\" x1=\"" << fmt(x) << "\" y1=\"" << top << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << height - bottom << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  out << "  <polyline class=\"best-so-far\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t k = 0; k < n; ++k) {
    out << (k ? " " : "") << fmt(px(static_cast<double>(k + 1))) << ',' << fmt(py(best[k]));
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

/// Critical samples in evaluation order; the minimum-f one is starred.
inline std::string critical_listing(const CampaignResult & r)
{
  std::ostringstream out;
  out << "Iter   f            x_scene\n";
  std::size_t star = r.samples.size();
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    if (r.samples[k].is_critical && (star == r.samples.size() || r.samples[k].f < r.samples[star].f)) {
      star = k;
    }
  }
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    const auto & s = r.samples[k];
    if (!s.is_critical) {
      continue;
    }
    std::string iter = std::to_string(k + 1) + (k == star ? "*" : "");
    iter.resize(std::max<std::size_t>(iter.size(), 6), ' ');
    std::string f = fmt(s.f);
    f.resize(std::max<std::size_t>(f.size(), 12), ' ');
    out << iter << ' ' << f << ' ' << '[';
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << (i ? " " : "") << fmt(s.x[i], "%.2f");
    }
    out << "]\n";
  }
  if (star == r.samples.size()) {
    out << "(no critical scenes)\n";
  }
  return out.str();
}

/// Summary rows in the style "GLIS  4 +- 0".
inline std::string comparison_table(const ComparisonStats & stats)
{
  std::ostringstream out;
  out << "scenario " << stats.scenario_id << '\n';
  out << "method  runs  critical (mean +- 95% CI)  rounded\n";
  for (const auto & m : stats.methods) {
    std::string name = to_string(m.method);
    name.resize(std::max<std::size_t>(name.size(), 7), ' ');
    out << name << ' ' << m.summary.count << "    " << fmt(m.summary.mean, "%.3f") << " +- "
        << fmt(m.summary.half_width, "%.3f") << "          "
        << fmt(std::round(m.summary.mean), "%.0f") << " +- "
        << fmt(std::round(m.summary.half_width), "%.0f") << '\n';
  }
  if (stats.rank_sum) {
    out << "rank-sum one-sided p = " << fmt(stats.rank_sum->p_greater, "%.4g") << '\n';
  }
  return out.str();
}

inline nlohmann::json comparison_json(const ComparisonStats & stats)
{
  nlohmann::json j;
  j["scenario"] = stats.scenario_id;
  j["methods"] = nlohmann::json::array();
  for (const auto & m : stats.methods) {
    j["methods"].push_back({{"method", to_string(m.method)},
                            {"seeds", m.seeds},
                            {"critical_counts", m.critical_counts},
                            {"mean", m.summary.mean},
                            {"ci95_half_width", m.summary.half_width},
                            {"runs", m.summary.count}});
  }
  if (stats.rank_sum) {
    j["rank_sum"] = {{"u", stats.rank_sum->u}, {"z", stats.rank_sum->z},
                     {"p_greater", stats.rank_sum->p_greater}};
  }
  return j;
}

/// Writes <stem>.json, <stem>.csv and <stem>.svg for every result under
/// dir/<scenario>/<method>/, where stem is the seed. Returns the written paths.
inline std::vector<std::filesystem::path> write_reports(const std::vector<CampaignResult> & results,
                                                        const std::filesystem::path & dir,
                                                        const std::vector<std::string> & names = {})
{
  if (results.empty()) {
    throw Error("invalid-argument", "report needs at least one result");
  }
  std::vector<std::filesystem::path> written;
  for (const auto & r : results) {
    const auto json_path = io::result_path(dir, r);
    io::save_result(json_path, r);
    auto csv_path = json_path;
    csv_path.replace_extension(".csv");
    io::write_text(csv_path, samples_csv(r, names));
    auto svg_path = json_path;
    svg_path.replace_extension(".svg");
    io::write_text(svg_path, best_so_far_svg(r));
    written.insert(written.end(), {json_path, csv_path, svg_path});
  }
  return written;
}

}  // namespace falsify::report
