#include "falsify/glis/glis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using falsify::glis::acquisition;
using falsify::glis::fit_surrogate;
using falsify::glis::GlisState;
using falsify::glis::idw_exploration;
using falsify::glis::Rng;
using falsify::glis::Sample;
using Vec = std::vector<double>;

TEST(IdwExploration, ZeroAtSampledPoints)
{
  const std::vector<Sample> s{{{0.1, 0.2}, 1.0}, {{-0.5, 0.7}, 2.0}};
  EXPECT_EQ(idw_exploration(s[0].x, s), 0.0);
  EXPECT_EQ(idw_exploration(s[1].x, s), 0.0);
}

TEST(IdwExploration, SingleSampleUnitDistance)
{
  const std::vector<Sample> s{{{0.0}, 0.0}};
  // w = e^-1 / 1, so z = (2/pi) atan(e).
  const double expected = 2.0 / std::numbers::pi * std::atan(std::exp(1.0));
  EXPECT_NEAR(expected, 0.775582985671415, 1e-14);
  EXPECT_NEAR(idw_exploration(Vec{1.0}, s), expected, 1e-14);
}

TEST(IdwExploration, ApproachesOneFarAway)
{
  const std::vector<Sample> s{{{0.0, 0.0}, 0.0}};
  EXPECT_GT(idw_exploration(Vec{5.0, 0.0}, s), 1.0 - 1e-9);
  EXPECT_LE(idw_exploration(Vec{5.0, 0.0}, s), 1.0);
}

TEST(IdwExploration, BoundedOnScaledBox)
{
  Rng rng(9);
  std::vector<Sample> s;
  for (int i = 0; i < 15; ++i) {
    s.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, 0.0});
  }
  for (int i = 0; i < 2000; ++i) {
    const Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double z = idw_exploration(x, s);
    EXPECT_GE(z, 0.0);
    EXPECT_LT(z, 1.0);
  }
}

TEST(Acquisition, DeltaZeroIsSurrogate)
{
  GlisState st;
  st.samples = {{{0.0}, 0.0}, {{1.0}, 1.0}, {{0.4}, 3.0}};
  st.surrogate = fit_surrogate(st.samples, 1.0);
  for (double x = -1.0; x <= 2.0; x += 0.05) {
    EXPECT_EQ(acquisition(Vec{x}, st, 0.0), (*st.surrogate)(Vec{x}));
  }
}

TEST(Acquisition, AtSampleEqualsSurrogate)
{
  GlisState st;
  st.samples = {{{0.0}, 0.0}, {{1.0}, 1.0}};
  st.surrogate = fit_surrogate(st.samples, 1.0);
  EXPECT_EQ(acquisition(Vec{1.0}, st, 2.0), (*st.surrogate)(Vec{1.0}));
}

TEST(Acquisition, HandEvaluatedMidpoint)
{
  GlisState st;
  st.samples = {{{0.0}, 0.0}, {{1.0}, 1.0}};
  st.surrogate = fit_surrogate(st.samples, 1.0);
  // beta = [sqrt2, -1]; phi(0.5) = sqrt(1.25) for both centers.
  const double s_half = (std::sqrt(2.0) - 1.0) * std::sqrt(1.25);
  const double w = 2.0 * std::exp(-0.25) / 0.25;
  const double z = 2.0 / std::numbers::pi * std::atan(1.0 / w);
  const double expected = s_half - 2.0 * 1.0 * z;
  EXPECT_NEAR(acquisition(Vec{0.5}, st, 2.0), expected, 1e-9);
}

TEST(Acquisition, RequiresSurrogate)
{
  GlisState st;
  st.samples = {{{0.0}, 0.0}};
  EXPECT_THROW(acquisition(Vec{0.5}, st, 2.0), falsify::Error);
}
