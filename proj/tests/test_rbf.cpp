#include "falsify/glis/rbf.hpp"
#include "falsify/glis/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using falsify::Error;
using falsify::glis::fit_surrogate;
using falsify::glis::loo_error;
using falsify::glis::recalibrate_epsilon;
using falsify::glis::Rng;
using falsify::glis::Sample;

namespace {

double mq(double r) { return std::sqrt(1.0 + r * r); }

// Dense Gaussian elimination with partial pivoting; test-only oracle.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b)
{
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
        piv = r;
      }
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) {
        a[r][k] -= m * a[c][k];
      }
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      s -= a[i][k] * x[k];
    }
    x[i] = s / a[i][i];
  }
  return x;
}

double dist(const std::vector<double> & a, const std::vector<double> & b)
{
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(s);
}

// Direct interpolation fit + evaluation.
double oracle_interpolant(const std::vector<Sample> & s, double eps, const std::vector<double> & x)
{
  std::vector<std::vector<double>> a(s.size(), std::vector<double>(s.size()));
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    f[i] = s[i].f;
    for (std::size_t j = 0; j < s.size(); ++j) {
      a[i][j] = mq(eps * dist(s[i].x, s[j].x));
    }
  }
  const auto beta = solve(a, f);
  double v = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    v += beta[i] * mq(eps * dist(x, s[i].x));
  }
  return v;
}

// Leave-one-out by actually refitting without each point.
double oracle_loo(const std::vector<Sample> & s, double eps)
{
  double total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<Sample> rest;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != i) {
        rest.push_back(s[j]);
      }
    }
    const double e = oracle_interpolant(rest, eps, s[i].x) - s[i].f;
    total += e * e;
  }
  return total;
}

std::vector<Sample> mq_data(double eps_star)
{
  std::vector<Sample> s;
  for (int i = 0; i < 9; ++i) {
    const double x = -3.0 + 0.75 * i;
    s.push_back({{x}, mq(eps_star * std::abs(x - 0.7))});
  }
  return s;
}

}  // namespace

TEST(FitSurrogate, TwoPointInterpolation)
{
  const std::vector<Sample> s{{{0.0}, 0.0}, {{1.0}, 1.0}};
  const auto sur = fit_surrogate(s, 1.0);
  EXPECT_NEAR(sur(std::vector<double>{0.0}), 0.0, 1e-9);
  EXPECT_NEAR(sur(std::vector<double>{1.0}), 1.0, 1e-9);
  // Closed form: A = [[1, sqrt2], [sqrt2, 1]] gives beta = [sqrt2, -1].
  EXPECT_NEAR(sur.coeffs[0], std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(sur.coeffs[1], -1.0, 1e-7);
  EXPECT_DOUBLE_EQ(sur.f_min, 0.0);
  EXPECT_DOUBLE_EQ(sur.f_max, 1.0);
}

TEST(FitSurrogate, ConstantDataMatchesDirectSolve)
{
  const std::vector<Sample> s{{{0.0}, 5.0}, {{1.0}, 5.0}, {{2.0}, 5.0}};
  const auto sur = fit_surrogate(s, 1.0);
  const double expected = oracle_interpolant(s, 1.0, {0.5});
  EXPECT_NEAR(expected, 4.935534901058356, 1e-12);
  EXPECT_NEAR(sur(std::vector<double>{0.5}), expected, 1e-6);
  for (const auto & c : s) {
    EXPECT_NEAR(sur(c.x), 5.0, 1e-6);
  }
}

TEST(FitSurrogate, InterpolatesRandomSamples)
{
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Sample> s;
    const int n = 5 + trial * 4;
    for (int i = 0; i < n; ++i) {
      std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double f = 1000.0 * std::sin(3 * x[0]) + x[1] * x[2] * 50.0;
      s.push_back({x, f});
    }
    const auto sur = fit_surrogate(s, 1.0);
    const double range = std::max(1.0, sur.f_max - sur.f_min);
    for (const auto & c : s) {
      EXPECT_LE(std::abs(sur(c.x) - c.f), 1e-6 * range);
    }
  }
}

TEST(FitSurrogate, DuplicateCentersAreSingular)
{
  const std::vector<Sample> s{{{0.0, 1.0}, 1.0}, {{0.0, 1.0}, 2.0}, {{1.0, 1.0}, 0.0}};
  try {
    fit_surrogate(s, 1.0);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), "singular-system");
  }
}

TEST(LooError, ClosedFormAgreesWithRefits)
{
  const auto s = mq_data(0.5);
  for (const double eps : {0.1, 0.5, 1.0, 2.0}) {
    const double fast = loo_error(s, eps);
    const double slow = oracle_loo(s, eps);
    EXPECT_NEAR(fast, slow, 1e-6 * std::max(1.0, slow)) << "eps " << eps;
  }
}

TEST(LooError, MatchesHighPrecisionReference)
{
  // 60-digit refits; at eps 0.1 the system is badly conditioned and a
  // diagonal ridge of 1e-8 would triple the result.
  const auto s = mq_data(0.5);
  const std::vector<std::pair<double, double>> ref{
    {0.1, 3.27919280285e-4}, {0.5, 1.07287024761e-6}, {1.0, 3.03905892877e-3}, {2.0, 2.0231606391e-2}};
  for (const auto & [eps, value] : ref) {
    EXPECT_NEAR(loo_error(s, eps), value, 1e-3 * value) << "eps " << eps;
  }
}

TEST(RecalibrateEpsilon, RecoversGeneratingShape)
{
  const auto s = mq_data(0.5);
  const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
  // Brute-force oracle picks 0.5 too.
  double best = grid[0];
  for (const double e : grid) {
    if (oracle_loo(s, e) < oracle_loo(s, best)) {
      best = e;
    }
  }
  EXPECT_DOUBLE_EQ(best, 0.5);
  EXPECT_DOUBLE_EQ(recalibrate_epsilon(s, grid), 0.5);
}

TEST(RecalibrateEpsilon, TiesGoToSmallestEpsilon)
{
  // All-zero data: every grid value has zero LOO error.
  const std::vector<Sample> s{{{0.0}, 0.0}, {{1.0}, 0.0}, {{2.0}, 0.0}, {{3.0}, 0.0}};
  const std::vector<double> grid{2.0, 0.25, 1.0};
  EXPECT_DOUBLE_EQ(recalibrate_epsilon(s, grid, 1.0), 0.25);
}

TEST(RecalibrateEpsilon, SingleGridValue)
{
  const auto s = mq_data(0.5);
  const std::vector<double> grid{3.0};
  EXPECT_DOUBLE_EQ(recalibrate_epsilon(s, grid), 3.0);
}

TEST(RecalibrateEpsilon, NeedsThreeSamples)
{
  const std::vector<Sample> s{{{0.0}, 0.0}, {{1.0}, 1.0}};
  const std::vector<double> grid{1.0, 2.0};
  EXPECT_THROW(recalibrate_epsilon(s, grid), Error);
}
