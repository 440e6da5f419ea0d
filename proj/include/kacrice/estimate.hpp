#pragma once

// Monte Carlo cumulants of zero counts with batch-jackknife errors, normalized
// moment diagnostics against a standard Gaussian, and scans over n or R.

#include <cstdint>
#include <vector>

#include "kacrice/gaussian.hpp"
#include "kacrice/simulate.hpp"

namespace kacrice {

struct CumulantEstimate {
  enum class Normalization { Raw, PerLength };

  int p = 1;
  double value = 0.0;      // plug-in cumulant of the whole sample
  double std_error = 0.0;  // delete-one-batch jackknife
  double scale = 1.0;      // n or R
  Normalization normalization = Normalization::Raw;

  double per_length() const { return value / scale; }
  double per_length_error() const { return std_error / scale; }
};

// Plug-in cumulants of orders 1..p_max computed from moments about the sample mean.
std::vector<double> plugin_cumulants(const std::vector<double>& samples, int p_max);

std::vector<CumulantEstimate> mc_cumulants(const std::vector<double>& samples, int p_max, int n_batches = 20,
                                           double scale = 1.0);

struct CltReport {
  std::vector<int> orders;          // 2..6
  std::vector<double> moments;      // E[W^p] of W = (Z - mean) / sd
  std::vector<double> targets;      // 1, 0, 3, 0, 15
  std::vector<double> deviations;   // moment - target
  std::vector<double> std_errors;   // delete-one-batch jackknife
  std::vector<bool> flagged;        // |deviation| > 3 std_error
  long sample_size = 0;
};

CltReport clt_report(const std::vector<double>& samples, int n_batches = 20);

struct CountOptions {
  long paths = 4000;
  std::uint64_t seed = 1;
  int workers = 0;
  double grid_step = 0.1;
  double refine_tol = 1e-10;
  double lag_accuracy = 0.1;
};

// Zero counts of independent paths: the full circle [0, 2 pi n) for trigonometric
// families, [0, window) for stationary ones. Entry i depends only on (seed, i).
// `totals`, when given, receives the summed counting diagnostics.
std::vector<double> simulate_zero_counts(const CovarianceModel& model, double window, const CountOptions& options,
                                         ZeroDiagnostics* totals = nullptr);

struct ScanRow {
  double parameter = 0.0;
  std::vector<CumulantEstimate> cumulants;
};

enum class ScanFamily { TrigPoly, Sinc };

// Trig: parameter n, model trig_poly(n). Sinc: parameter R, unit sinc on [0, R).
// Cumulants are normalized per unit of the parameter.
std::vector<ScanRow> convergence_scan(ScanFamily family, const std::vector<double>& parameters, int p_max,
                                      const CountOptions& options, int n_batches = 20);

}  // namespace kacrice
