#pragma once

#include "falsify/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace falsify::stats {

struct MeanCi
{
  double mean = 0.0;
  /// Half-width of the two-sided 95% Student-t interval.
  double half_width = 0.0;
  std::size_t count = 0;

  bool operator==(const MeanCi &) const = default;
};

inline MeanCi mean_ci95(std::span<const double> values)
{
  if (values.size() < 2) {
    throw Error("invalid-argument", "a confidence interval needs at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {mean, t * sd / std::sqrt(n), values.size()};
}

struct RankSumResult
{
  double u = 0.0;  ///< Mann-Whitney U of the first sample
  double z = 0.0;
  /// One-sided p-value for "first sample tends to be larger".
  double p_greater = 1.0;

  bool operator==(const RankSumResult &) const = default;
};

/// Wilcoxon rank-sum test, normal approximation with tie and continuity correction.
inline RankSumResult rank_sum_greater(std::span<const double> a, std::span<const double> b)
{
  if (a.empty() || b.empty()) {
    throw Error("invalid-argument", "rank-sum test needs two nonempty samples");
  }
  struct Item
  {
    double value;
    bool first;
  };
  std::vector<Item> all;
  all.reserve(a.size() + b.size());
  for (const double v : a) {
    all.push_back({v, true});
  }
  for (const double v : b) {
    all.push_back({v, false});
  }
  std::sort(all.begin(), all.end(), [](const Item & x, const Item & y) { return x.value < y.value; });

  const double n = static_cast<double>(all.size());
  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) {
      ++j;
    }
    const double average_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (all[m].first) {
        rank_sum_a += average_rank;
      }
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  RankSumResult r;
  r.u = rank_sum_a - na * (na + 1.0) / 2.0;
  const double variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    return r;
  }
  r.z = (r.u - na * nb / 2.0 - 0.5) / std::sqrt(variance);
  r.p_greater = 0.5 * std::erfc(r.z / std::sqrt(2.0));
  return r;
}

}  // namespace falsify::stats
