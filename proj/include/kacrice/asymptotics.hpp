#pragma once

// Limiting cumulant constants gamma_p = sum_k S(p,k) int F_{k,inf} of the zero
// count of a stationary process, per unit length.

#include <cstdint>
#include <map>

#include "kacrice/gaussian.hpp"
#include "kacrice/kac.hpp"

namespace kacrice {

// (1/pi) sqrt(-r''(0)/r(0)) of the stationary limit: the zero intensity.
double gamma1(const CovarianceModel& model);

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;       // quadrature (or Monte Carlo) error on [-T, T]^{k-1}
  double tail_bound = 0.0;  // decay-envelope bound on the mass beyond T
  double tail_estimate = 0.0;  // mass beyond T assuming an inverse-square marginal fitted on [T/2, T]
  long evaluations = 0;
  bool monte_carlo = false;
};

struct GammaOptions {
  double truncation = 40.0;  // T for k = 2
  double truncation_high = 20.0;  // T for k >= 3
  int order = 10;           // Gauss-Legendre points per unit panel
  double eta = 0.25;
  int workers = 0;
  long mc_points = 4000;    // integrand samples for k = 4
  long mc_samples = 20000;  // absolute-moment samples per integrand evaluation for k = 4
  std::uint64_t seed = 1;
};

// F_{k,inf}(0, x_2, ..., x_k) of the stationary limit.
double f_k_infinity(const CovarianceModel& model, const std::vector<double>& offsets, const KacOptions& options = {});

// int_{R^{k-1}} F_{k,inf}(0, x) dx truncated to |x| <= T, k in 2..4.
IntegralEstimate f_k_infinity_integral(const CovarianceModel& model, int k, const GammaOptions& options = {});

struct GammaEntry {
  double value = 0.0;  // includes the fitted tail correction of every integral
  double error = 0.0;  // quadrature error plus half of each tail correction
};

struct GammaTable {
  std::map<int, GammaEntry> gamma;
  std::map<int, IntegralEstimate> integrals;  // k -> int F_{k,inf}; k = 1 holds gamma1
  double truncation = 0.0;
};

// sum_k S(p,k) (int F_k + fitted tail); `integrals` must hold k = 1..p.
GammaEntry combine_gamma(const std::map<int, IntegralEstimate>& integrals, int p);

// gamma_1..gamma_p for p <= 4.
GammaTable gamma_table(const CovarianceModel& model, int p, const GammaOptions& options = {});

GammaEntry gamma_p(const CovarianceModel& model, int p, const GammaOptions& options = {});

}  // namespace kacrice
