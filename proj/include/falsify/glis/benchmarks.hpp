#pragma once

#include "falsify/glis/problem.hpp"

#include <string>
#include <vector>

namespace falsify::glis {

/// Synthetic problem with a known minimizer, for optimizer self-tests.
struct Benchmark
{
  std::string name;
  OptProblem problem;
  Vector x_star;
  int n_max = 20;
  int n_init = 5;
  /// A run succeeds when best.x is within this (infinity-norm) distance of x_star.
  double x_tolerance = 0.05;
};

inline std::vector<Benchmark> benchmarks()
{
  std::vector<Benchmark> out;

  Benchmark quad;
  quad.name = "quadratic-1d";
  quad.problem.lower = {0.0};
  quad.problem.upper = {1.0};
  quad.problem.objective = [](VectorView x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  quad.x_star = {0.3};
  out.push_back(std::move(quad));

  Benchmark sphere;
  sphere.name = "sphere-2d";
  sphere.problem.lower = {-2.0, -2.0};
  sphere.problem.upper = {2.0, 2.0};
  sphere.problem.objective = [](VectorView x) {
    return (x[0] - 0.5) * (x[0] - 0.5) + (x[1] + 1.0) * (x[1] + 1.0);
  };
  sphere.x_star = {0.5, -1.0};
  sphere.n_max = 40;
  sphere.n_init = 10;
  sphere.x_tolerance = 0.1;
  out.push_back(std::move(sphere));

  Benchmark rosen;
  rosen.name = "rosenbrock-2d";
  rosen.problem.lower = {-2.0, -1.0};
  rosen.problem.upper = {2.0, 3.0};
  rosen.problem.objective = [](VectorView x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  rosen.x_star = {1.0, 1.0};
  rosen.n_max = 80;
  rosen.n_init = 20;
  rosen.x_tolerance = 0.5;
  out.push_back(std::move(rosen));
  return out;
}

}  // namespace falsify::glis
