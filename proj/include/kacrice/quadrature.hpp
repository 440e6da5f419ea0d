#pragma once

// Gauss-Legendre rules, composite panels, and Duffy-collapsed simplex rules.

#include <functional>
#include <span>
#include <vector>

namespace kacrice::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; cached per n, thread-safe.
const Rule& gauss_legendre(int n);

// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre: [a, b] split into `panels` equal pieces.
Rule composite(int order, double a, double b, int panels);

double integrate(const std::function<double(double)>& f, double a, double b, int order, int panels = 1);

// Tensor rule on the standard simplex {t_i >= 0, sum t_i = 1} of dimension `dim`
// (dim + 1 barycentric weights per point). Weights sum to 1/dim!, the Lebesgue
// volume in the first `dim` coordinates.
struct SimplexRule {
  int dim = 0;
  std::vector<std::vector<double>> barycentric;  // each of size dim + 1
  std::vector<double> weights;
};

SimplexRule simplex_rule(int dim, int order);

// Two-dimensional adaptive Gauss-Legendre on [0,1]^2 by recursive quadrisection;
// returns {value, error estimate}.
struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

AdaptiveResult adaptive_square(const std::function<double(double, double)>& f, double abs_tol, double rel_tol,
                               int max_evaluations = 200000);

// One-dimensional adaptive Gauss-Legendre by recursive bisection.
AdaptiveResult adaptive_interval(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                 double rel_tol, int max_depth = 30);

}  // namespace kacrice::quad
