#pragma once

// Sample paths of random trigonometric polynomials and of band-limited stationary
// processes, zero counting, and linear statistics of the zero set.

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "kacrice/divided_diff.hpp"
#include "kacrice/gaussian.hpp"

namespace kacrice {

// A realization f. Spectral paths are f(x) = Re sum_j c_j exp(i (omega0 + j delta) x),
// tabulated on the grid x_m = m h (delta h = 2 pi / N) by one FFT; function paths
// wrap caller-supplied f and f'.
class PathSample {
 public:
  static PathSample spectral(std::vector<std::complex<double>> coefficients, double omega0, double delta,
                             double grid_step_hint, Domain domain);
  static PathSample function(std::function<double(double)> f, std::function<double(double)> df,
                             Domain domain = Domain::line());

  double value(double x) const;
  double derivative(double x) const;
  std::pair<double, double> value_and_derivative(double x) const;

  bool has_grid() const noexcept { return !grid_.empty(); }
  const std::vector<double>& grid() const noexcept { return grid_; }
  double grid_step() const noexcept { return grid_step_; }
  // Extent N h of the tabulated grid; spectral paths are antiperiodic with this period.
  double grid_extent() const noexcept { return grid_step_ * static_cast<double>(grid_.size()); }
  const Domain& domain() const noexcept { return domain_; }
  const std::vector<std::complex<double>>& coefficients() const noexcept { return coefficients_; }

 private:
  std::vector<std::complex<double>> coefficients_;
  double omega0_ = 0.0;
  double delta_ = 0.0;
  std::vector<double> grid_;
  double grid_step_ = 0.0;
  Domain domain_;
  std::function<double(double)> f_;
  std::function<double(double)> df_;
};

// h_n(x/n) with iid coefficients (trig_poly) or Toeplitz-correlated coefficients
// drawn by circulant embedding (trig_poly_correlated). Domain: circle of length 2 pi n.
PathSample sample_trig_poly(const CovarianceModel& model, std::uint64_t seed, std::uint64_t path_index,
                            double grid_step = 0.1);

struct StationaryOptions {
  double window = 200.0;      // R: the path is accurate on [0, R)
  double grid_step = 0.1;     // upper bound on the FFT grid spacing
  double lag_accuracy = 0.1;  // delta * R; covariance error ~ (delta tau)^2 / 24 at lag tau
};

// Band-limited stationary path with spectral mass binned at midpoint frequencies:
// covariance r(tau) (delta tau / 2) / sin(delta tau / 2) for the sinc family.
PathSample sample_stationary(const CovarianceModel& model, std::uint64_t seed, std::uint64_t path_index,
                             const StationaryOptions& options = {});

// Coefficients (a_k) with E a_k a_l = correlation[|k-l|], two independent draws,
// by circulant embedding of length 2(n-1).
std::pair<std::vector<double>, std::vector<double>> sample_correlated_coefficients(
    const std::vector<double>& correlation, std::mt19937_64& engine);

struct Window {
  double a = 0.0;
  double b = 0.0;  // half-open [a, b)
  double length() const { return b - a; }
};

struct ZeroDiagnostics {
  long grid_points = 0;
  long refinement_iterations = 0;
  long rescanned_cells = 0;
  long rescan_zeros = 0;        // zeros found only by the double-density rescan
  long suspected_misses = 0;    // rescanned cells with an unresolved near-tangency
};

struct ZeroSet {
  std::vector<double> zeros;
  Window window;
  ZeroDiagnostics diagnostics;

  std::size_t count() const noexcept { return zeros.size(); }
};

struct ZeroOptions {
  double grid_step = 0.1;
  double refine_tol = 1e-10;
  double path_scale = 1.0;  // typical |f|; near-tangency threshold is 0.1 of it
  int rescan_depth = 4;
};

ZeroSet count_zeros(const PathSample& path, Window window, const ZeroOptions& options = {});

double linear_statistic(const ZeroSet& zeros, const std::function<double(double)>& phi);

}  // namespace kacrice
