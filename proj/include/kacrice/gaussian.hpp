#pragma once

// Covariance models, covariance of divided differences Sigma^I(x_{A,A}), Schur
// complements, and absolute moments E prod_a |(MY)_a| of Gaussian vectors.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "kacrice/divided_diff.hpp"
#include "kacrice/partitions.hpp"

namespace kacrice {

// Real spectral representation f(x) = Re sum_k c_k exp(i omega_k x) with
// E[c c^*] = 2 P and E[c c^T] = 0, so that r(s,t) = Re sum_{k,l} P_{kl} e^{i(omega_k s - omega_l t)}.
struct Spectrum {
  std::vector<double> frequencies;
  Eigen::MatrixXd weights;  // P; a single column holds the diagonal
  bool diagonal = true;
};

class CovarianceModel {
 public:
  enum class Family { Sinc, Cosine, TrigPoly, TrigPolyCorrelated };

  // r(tau) = sin(scale tau) / (scale tau)
  static CovarianceModel sinc(double scale = 1.0);
  // r(tau) = cos(frequency tau)
  static CovarianceModel cosine(double frequency = 1.0);
  // f_n(x) = h_n(x/n), h_n = n^{-1/2} sum_{k<n} a_k cos(kx) + b_k sin(kx), iid N(0,1) coefficients.
  static CovarianceModel trig_poly(int n);
  // As trig_poly with E[a_k a_l] = E[b_k b_l] = correlation[|k-l|], correlation[0] = 1.
  static CovarianceModel trig_poly_correlated(int n, std::vector<double> correlation);
  // Coefficient correlation a^{|m|}, spectral density (1-a^2)/(1 - 2a cos x + a^2).
  static CovarianceModel trig_poly_ar1(int n, double a);

  Family family() const noexcept { return family_; }
  std::string name() const;
  int n() const noexcept { return n_; }
  double scale() const noexcept { return scale_; }
  const std::vector<double>& coefficient_correlation() const noexcept { return correlation_; }
  bool stationary() const noexcept { return family_ != Family::TrigPolyCorrelated; }
  Domain domain() const;
  int max_order() const noexcept { return kMaxDerivativeOrder; }

  // r^{(u,v)}(s,t) = E[f^{(u)}(s) f^{(v)}(t)].
  double kernel(int u, int v, double s, double t) const;

  // k-th derivative of the stationary limit r_infinity at tau.
  double limit(int order, double tau) const;

  // Stationary limit as a model in its own right (sinc for every trig family).
  CovarianceModel limit_model() const;

  // Decay envelope g with |r^{(u,v)}(s,t)| <= g(|s-t|) for u, v <= 2.
  double envelope(double tau) const;

  // Local variance profile: r_n(nx+s, nx+t) ~ psi(x) r_infinity(s-t); x in [0, 2 pi).
  double psi(double x) const;

  // Spectral representation accurate for divided differences whose nodes span
  // at most `span` (only the sinc quadrature depends on it).
  Spectrum spectrum(double span) const;

  static constexpr int kMaxDerivativeOrder = 12;

 private:
  Family family_ = Family::Sinc;
  double scale_ = 1.0;
  int n_ = 0;
  std::vector<double> correlation_;
};

// Derivatives of sin(tau)/tau.
double sinc_derivative(int order, double tau);

struct BlockCovariance {
  Eigen::MatrixXd sigma;  // 2|A| x 2|A|, coordinates (1,a) then (2,a)
  SetPartition partition;
  NodeVector nodes;
  double det11 = 0.0;
  double min_eigenvalue11 = 0.0;

  int size() const noexcept { return static_cast<int>(sigma.rows()) / 2; }
  Eigen::MatrixXd sigma11() const { return sigma.topLeftCorner(size(), size()); }
  Eigen::MatrixXd sigma12() const { return sigma.topRightCorner(size(), size()); }
  Eigen::MatrixXd sigma22() const { return sigma.bottomRightCorner(size(), size()); }
};

enum class CovarianceMethod { Spectral, Simplex };

// Sigma^I(x_{A,A}) = Cov(f_I[x_{A,A}]). Spectral: exact divided differences of
// the spectral exponentials; Simplex: Hermite-Genocchi double simplex quadrature
// of the kernel derivatives (slow, used as a cross-check).
BlockCovariance dd_covariance(const CovarianceModel& model, const SetPartition& partition, const NodeVector& nodes,
                              CovarianceMethod method = CovarianceMethod::Spectral, int simplex_order = 12);

// Floor for det Sigma^{11} relative to (tr Sigma^{11} / |A|)^{|A|}.
inline constexpr double kConditioningFloor = 1e-12;

// Sigma^{22} - Sigma^{21} (Sigma^{11})^{-1} Sigma^{12} for the leading k x k block.
Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& sigma, int k);
Eigen::MatrixXd schur_complement(const BlockCovariance& sigma);

struct ConditionalLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Law of the second block given that the first block vanishes.
ConditionalLaw conditional_zero_law(const BlockCovariance& sigma);

struct AbsMomentOptions {
  enum class Method { Auto, Quadrature, MonteCarlo };
  Method method = Method::Auto;
  long mc_samples = 200000;
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

struct AbsMomentResult {
  double value = 0.0;
  double error = 0.0;  // standard error (Monte Carlo) or quadrature error estimate
  bool monte_carlo = false;
};

// E prod_a |(M Y)_a| for Y ~ N(0, cov). Closed forms for |A| <= 2, a closed-form
// radial integral plus adaptive angular quadrature for |A| = 3, orthant
// decomposition with simplex quadrature for |A| = 4, 5; Monte Carlo on request or
// when the quadrature does not converge.
AbsMomentResult gaussian_abs_moment(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& weight,
                                    const AbsMomentOptions& options = {});

}  // namespace kacrice
