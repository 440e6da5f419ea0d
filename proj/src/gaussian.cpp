#include "kacrice/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/quadrature.hpp"

namespace kacrice {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double factorial(int k) {
  double value = 1.0;
  for (int j = 2; j <= k; ++j) value *= j;
  return value;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// k-th derivative of cos evaluated at x.
double cos_derivative(int k, double x) { return std::cos(x + 0.5 * kPi * k); }

Complex ipow(double omega, int k) {
  static const Complex units[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return units[k % 4] * std::pow(omega, k);
}

void check_orders(int u, int v) {
  if (u < 0 || v < 0) throw ContractError("kernel: derivative orders must be non-negative");
  if (u > CovarianceModel::kMaxDerivativeOrder || v > CovarianceModel::kMaxDerivativeOrder) {
    throw CapabilityError("kernel: derivative order exceeds the model's smoothness budget");
  }
}

}  // namespace

double sinc_derivative(int order, double tau) {
  if (order < 0) throw ContractError("sinc_derivative: negative order");
  const double a = std::abs(tau);
  if (a < std::max(0.5, static_cast<double>(order))) {
    // sin(t)/t = sum_j (-1)^j t^{2j} / (2j+1)!, differentiated termwise.
    double sum = 0.0;
    const int j0 = (order + 1) / 2;
    double magnitude = 0.0;
    for (int j = j0; j < j0 + 80; ++j) {
      const int power = 2 * j - order;
      const double term =
          ((j % 2) ? -1.0 : 1.0) * std::pow(tau, power) / ((2.0 * j + 1.0) * factorial(power));
      sum += term;
      magnitude = std::max(magnitude, std::abs(term));
      if (j > j0 + 2 && std::abs(term) < 1e-18 * std::max(magnitude, 1e-300)) break;
      if (power > 150) break;
    }
    return sum;
  }
  // Leibniz rule on sin(t) * t^{-1}.
  double sum = 0.0;
  for (int j = 0; j <= order; ++j) {
    const int m = order - j;
    const double inverse_derivative = ((m % 2) ? -1.0 : 1.0) * factorial(m) * std::pow(tau, -m - 1);
    sum += binomial(order, j) * std::sin(tau + 0.5 * kPi * j) * inverse_derivative;
  }
  return sum;
}

CovarianceModel CovarianceModel::sinc(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ModelError("sinc: scale must be positive");
  CovarianceModel m;
  m.family_ = Family::Sinc;
  m.scale_ = scale;
  return m;
}

CovarianceModel CovarianceModel::cosine(double frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ModelError("cosine: frequency must be positive");
  CovarianceModel m;
  m.family_ = Family::Cosine;
  m.scale_ = frequency;
  return m;
}

CovarianceModel CovarianceModel::trig_poly(int n) {
  if (n < 1) throw ModelError("trig_poly: n must be at least 1");
  CovarianceModel m;
  m.family_ = Family::TrigPoly;
  m.n_ = n;
  return m;
}

CovarianceModel CovarianceModel::trig_poly_correlated(int n, std::vector<double> correlation) {
  if (n < 1) throw ModelError("trig_poly_correlated: n must be at least 1");
  if (correlation.empty() || std::abs(correlation[0] - 1.0) > 1e-12) {
    throw ModelError("trig_poly_correlated: correlation[0] must equal 1");
  }
  correlation.resize(static_cast<std::size_t>(n), 0.0);
  Eigen::MatrixXd toeplitz(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) toeplitz(k, l) = correlation[static_cast<std::size_t>(std::abs(k - l))];
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(toeplitz, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -1e-10) throw ModelError("trig_poly_correlated: coefficient correlation is not positive semidefinite");
  CovarianceModel m;
  m.family_ = Family::TrigPolyCorrelated;
  m.n_ = n;
  m.correlation_ = std::move(correlation);
  return m;
}

CovarianceModel CovarianceModel::trig_poly_ar1(int n, double a) {
  if (!(std::abs(a) < 1.0)) throw ModelError("trig_poly_ar1: |a| must be below 1");
  std::vector<double> correlation(static_cast<std::size_t>(std::max(n, 1)));
  for (std::size_t m = 0; m < correlation.size(); ++m) correlation[m] = std::pow(a, static_cast<double>(m));
  return trig_poly_correlated(n, std::move(correlation));
}

std::string CovarianceModel::name() const {
  switch (family_) {
    case Family::Sinc:
      return scale_ == 1.0 ? "sinc" : "sinc(scale=" + std::to_string(scale_) + ")";
    case Family::Cosine:
      return "cosine(frequency=" + std::to_string(scale_) + ")";
    case Family::TrigPoly:
      return "trig_poly(n=" + std::to_string(n_) + ")";
    case Family::TrigPolyCorrelated:
      return "trig_poly_correlated(n=" + std::to_string(n_) + ")";
  }
  return "unknown";
}

Domain CovarianceModel::domain() const {
  if (family_ == Family::TrigPoly || family_ == Family::TrigPolyCorrelated) return Domain::circle(2.0 * kPi * n_);
  return Domain::line();
}

double CovarianceModel::kernel(int u, int v, double s, double t) const {
  check_orders(u, v);
  const double sign = (v % 2) ? -1.0 : 1.0;
  const int k = u + v;
  switch (family_) {
    case Family::Sinc:
      return sign * std::pow(scale_, k) * sinc_derivative(k, scale_ * (s - t));
    case Family::Cosine:
      return sign * std::pow(scale_, k) * cos_derivative(k, scale_ * (s - t));
    case Family::TrigPoly: {
      double sum = 0.0;
      for (int j = 0; j < n_; ++j) {
        const double omega = static_cast<double>(j) / n_;
        sum += std::pow(omega, k) * cos_derivative(k, omega * (s - t));
      }
      return sign * sum / n_;
    }
    case Family::TrigPolyCorrelated: {
      std::vector<Complex> left(static_cast<std::size_t>(n_));
      std::vector<Complex> right(static_cast<std::size_t>(n_));
      for (int j = 0; j < n_; ++j) {
        const double omega = static_cast<double>(j) / n_;
        left[static_cast<std::size_t>(j)] = ipow(omega, u) * std::polar(1.0, omega * s);
        right[static_cast<std::size_t>(j)] = std::conj(ipow(omega, v) * std::polar(1.0, omega * t));
      }
      double sum = 0.0;
      for (int j = 0; j < n_; ++j) {
        for (int l = 0; l < n_; ++l) {
          sum += correlation_[static_cast<std::size_t>(std::abs(j - l))] *
                 (left[static_cast<std::size_t>(j)] * right[static_cast<std::size_t>(l)]).real();
        }
      }
      return sum / n_;
    }
  }
  return 0.0;
}

double CovarianceModel::limit(int order, double tau) const {
  check_orders(order, 0);
  switch (family_) {
    case Family::Sinc:
      return std::pow(scale_, order) * sinc_derivative(order, scale_ * tau);
    case Family::Cosine:
      return std::pow(scale_, order) * cos_derivative(order, scale_ * tau);
    case Family::TrigPoly:
    case Family::TrigPolyCorrelated:
      return sinc_derivative(order, tau);
  }
  return 0.0;
}

CovarianceModel CovarianceModel::limit_model() const {
  if (family_ == Family::TrigPoly || family_ == Family::TrigPolyCorrelated) return sinc(1.0);
  return *this;
}

double CovarianceModel::envelope(double tau) const {
  const double a = std::abs(tau);
  switch (family_) {
    case Family::Sinc: {
      const double amplitude = std::max(1.0, scale_ * scale_);
      return amplitude * std::min(1.0, 2.0 / (scale_ * a));
    }
    case Family::Cosine:
      return std::max(1.0, scale_ * scale_);
    case Family::TrigPoly:
    case Family::TrigPolyCorrelated: {
      double total = 1.0;
      for (std::size_t m = 1; m < correlation_.size(); ++m) total += 2.0 * std::abs(correlation_[m]);
      const double d = domain().distance(0.0, a);
      const double dirichlet = 2.0 / (n_ * std::abs(std::sin(d / (2.0 * n_))));
      return total * std::min(1.0, dirichlet);
    }
  }
  return 1.0;
}

double CovarianceModel::psi(double x) const {
  if (family_ != Family::TrigPolyCorrelated) return 1.0;
  double sum = 1.0;
  for (std::size_t m = 1; m < correlation_.size(); ++m) sum += 2.0 * correlation_[m] * std::cos(static_cast<double>(m) * x);
  return sum;
}

Spectrum CovarianceModel::spectrum(double span) const {
  Spectrum s;
  switch (family_) {
    case Family::Sinc: {
      // r(tau) = int_0^1 cos(scale * w * tau) dw
      const int order = std::min(512, 24 + static_cast<int>(std::ceil(0.75 * scale_ * std::abs(span))));
      const quad::Rule rule = quad::gauss_legendre(order, 0.0, 1.0);
      s.frequencies.resize(rule.nodes.size());
      s.weights.resize(static_cast<Eigen::Index>(rule.nodes.size()), 1);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        s.frequencies[j] = scale_ * rule.nodes[j];
        s.weights(static_cast<Eigen::Index>(j), 0) = rule.weights[j];
      }
      if (order == 512 && 0.75 * scale_ * std::abs(span) > 488) {
        throw SizeLimitError("spectrum: node span too large for the sinc spectral quadrature");
      }
      break;
    }
    case Family::Cosine:
      s.frequencies = {scale_};
      s.weights = Eigen::MatrixXd::Ones(1, 1);
      break;
    case Family::TrigPoly:
      for (int j = 0; j < n_; ++j) s.frequencies.push_back(static_cast<double>(j) / n_);
      s.weights = Eigen::MatrixXd::Constant(n_, 1, 1.0 / n_);
      break;
    case Family::TrigPolyCorrelated:
      for (int j = 0; j < n_; ++j) s.frequencies.push_back(static_cast<double>(j) / n_);
      s.weights.resize(n_, n_);
      for (int k = 0; k < n_; ++k) {
        for (int l = 0; l < n_; ++l) s.weights(k, l) = correlation_[static_cast<std::size_t>(std::abs(k - l))] / n_;
      }
      s.diagonal = false;
      break;
  }
  return s;
}

namespace {

// exp(i omega x) divided over a node sequence via the Hermite table in complex arithmetic.
Complex exp_divided_difference_table(double omega, std::vector<double> z) {
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  std::vector<Complex> column(n);
  for (std::size_t i = 0; i < n; ++i) column[i] = std::polar(1.0, omega * z[i]);
  double fact = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    fact *= static_cast<double>(j);
    for (std::size_t i = n - 1; i >= j; --i) {
      if (z[i] - z[i - j] <= kConfluenceThreshold * std::max(1.0, std::abs(z[i]))) {
        column[i] = ipow(omega, static_cast<int>(j)) * std::polar(1.0, omega * z[i]) / fact;
      } else {
        column[i] = (column[i] - column[i - 1]) / (z[i] - z[i - j]);
      }
    }
  }
  return column[n - 1];
}

// Row of exp(i omega_k .)[sequence] over all spectral frequencies.
Eigen::RowVectorXcd exp_divided_differences(const std::vector<double>& sequence, const std::vector<double>& omegas) {
  const int m = static_cast<int>(sequence.size());
  const double center = std::accumulate(sequence.begin(), sequence.end(), 0.0) / m;
  std::vector<double> y(sequence);
  double radius = 0.0;
  for (double& v : y) {
    v -= center;
    radius = std::max(radius, std::abs(v));
  }
  double omega_max = 0.0;
  for (double w : omegas) omega_max = std::max(omega_max, std::abs(w));
  Eigen::RowVectorXcd row(static_cast<Eigen::Index>(omegas.size()));
  if (omega_max * radius > 8.0) {
    for (std::size_t k = 0; k < omegas.size(); ++k) row(static_cast<Eigen::Index>(k)) = exp_divided_difference_table(omegas[k], sequence);
    return row;
  }
  // exp(i w x) = e^{i w c} sum_j (i w)^j (x-c)^j / j!, and (x-c)^j divided over the
  // sequence equals h_{j-m+1}(y).
  const int terms = 40;
  const auto h = complete_homogeneous(y, terms);
  std::vector<double> inv_fact(static_cast<std::size_t>(m + terms));
  inv_fact[0] = 1.0;
  for (std::size_t j = 1; j < inv_fact.size(); ++j) inv_fact[j] = inv_fact[j - 1] / static_cast<double>(j);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k];
    Complex sum = 0.0;
    for (int i = terms - 1; i >= 0; --i) {
      const int j = m - 1 + i;
      sum += ipow(w, j) * inv_fact[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(i)];
    }
    row(static_cast<Eigen::Index>(k)) = std::polar(1.0, w * center) * sum;
  }
  return row;
}

bool collapsed(const std::vector<double>& sequence) {
  const auto [lo, hi] = std::minmax_element(sequence.begin(), sequence.end());
  return *hi - *lo <= kConfluenceThreshold * std::max(1.0, std::abs(*hi));
}

Eigen::MatrixXd spectral_gram(const CovarianceModel& model, const std::vector<std::vector<double>>& sequences) {
  double lo = sequences.front().front();
  double hi = lo;
  for (const auto& seq : sequences) {
    for (double x : seq) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const Spectrum spectrum = model.spectrum(hi - lo);
  const auto dim = static_cast<Eigen::Index>(sequences.size());
  Eigen::MatrixXcd e(dim, static_cast<Eigen::Index>(spectrum.frequencies.size()));
  for (Eigen::Index i = 0; i < dim; ++i) {
    e.row(i) = exp_divided_differences(sequences[static_cast<std::size_t>(i)], spectrum.frequencies);
  }
  const Eigen::MatrixXd re = e.real();
  const Eigen::MatrixXd im = e.imag();
  if (spectrum.diagonal) {
    const auto w = spectrum.weights.col(0).asDiagonal();
    return re * w * re.transpose() + im * w * im.transpose();
  }
  return re * spectrum.weights * re.transpose() + im * spectrum.weights * im.transpose();
}

Eigen::MatrixXd simplex_gram(const CovarianceModel& model, const std::vector<std::vector<double>>& sequences,
                             int order) {
  const auto dim = static_cast<Eigen::Index>(sequences.size());
  std::vector<std::vector<double>> points(sequences.size());
  std::vector<std::vector<double>> weights(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto rule = quad::simplex_rule(static_cast<int>(sequences[i].size()) - 1, order);
    for (std::size_t p = 0; p < rule.weights.size(); ++p) {
      double x = 0.0;
      for (std::size_t a = 0; a < sequences[i].size(); ++a) x += rule.barycentric[p][a] * sequences[i][a];
      points[i].push_back(x);
      weights[i].push_back(rule.weights[p]);
    }
  }
  Eigen::MatrixXd gram(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int u = static_cast<int>(sequences[static_cast<std::size_t>(i)].size()) - 1;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const int v = static_cast<int>(sequences[static_cast<std::size_t>(j)].size()) - 1;
      double sum = 0.0;
      const auto& pi = points[static_cast<std::size_t>(i)];
      const auto& pj = points[static_cast<std::size_t>(j)];
      for (std::size_t p = 0; p < pi.size(); ++p) {
        double inner = 0.0;
        for (std::size_t q = 0; q < pj.size(); ++q) inner += weights[static_cast<std::size_t>(j)][q] * model.kernel(u, v, pi[p], pj[q]);
        sum += weights[static_cast<std::size_t>(i)][p] * inner;
      }
      gram(i, j) = sum;
      gram(j, i) = sum;
    }
  }
  return gram;
}

void check_spd_input(const Eigen::MatrixXd& cov, const char* where) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw ContractError(std::string(where) + ": covariance must be square");
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ContractError(std::string(where) + ": covariance is not symmetric");
  }
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-10 * scale) throw ContractError(std::string(where) + ": covariance is not positive semidefinite");
}

}  // namespace

BlockCovariance dd_covariance(const CovarianceModel& model, const SetPartition& partition, const NodeVector& nodes,
                              CovarianceMethod method, int simplex_order) {
  const int n = nodes.size();
  if (n == 0 || partition.ground_size() != n) throw ContractError("dd_covariance: partition/node size mismatch");
  // Nodes in distinct cells must be distinct.
  const Domain& domain = nodes.domain();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (partition.block_of(a) != partition.block_of(b) && domain.distance(nodes[a], nodes[b]) == 0.0) {
        throw ContractError("dd_covariance: coincident nodes in different cells");
      }
    }
  }
  const auto sequences = dd_coordinate_sequences(nodes, partition, true);

  BlockCovariance out;
  out.partition = partition;
  out.nodes = nodes;
  if (method == CovarianceMethod::Simplex) {
    out.sigma = simplex_gram(model, sequences, simplex_order);
  } else if (std::all_of(sequences.begin(), sequences.end(), collapsed)) {
    const auto dim = static_cast<Eigen::Index>(sequences.size());
    out.sigma.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& si = sequences[static_cast<std::size_t>(i)];
      const int u = static_cast<int>(si.size()) - 1;
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto& sj = sequences[static_cast<std::size_t>(j)];
        const int v = static_cast<int>(sj.size()) - 1;
        out.sigma(i, j) = model.kernel(u, v, si.front(), sj.front()) / (factorial(u) * factorial(v));
      }
    }
  } else {
    out.sigma = spectral_gram(model, sequences);
  }
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();

  const Eigen::MatrixXd s11 = out.sigma11();
  out.det11 = s11.determinant();
  out.min_eigenvalue11 =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s11, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  const double diagonal_product = s11.diagonal().prod();
  if (!(out.det11 > kConditioningFloor * diagonal_product) || !(diagonal_product > 0.0)) {
    throw ConditioningError("dd_covariance: divided-difference covariance is numerically singular", out.det11,
                            out.min_eigenvalue11);
  }
  return out;
}

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& sigma, int k) {
  if (sigma.rows() != sigma.cols() || k < 0 || k > sigma.rows()) throw ContractError("schur_complement: bad block size");
  const Eigen::Index m = sigma.rows() - k;
  const Eigen::MatrixXd s11 = sigma.topLeftCorner(k, k);
  if (k == 0) return sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(s11);
  const double diagonal_product = s11.diagonal().prod();
  const double det = s11.determinant();
  if (llt.info() != Eigen::Success || !(det > kConditioningFloor * diagonal_product)) {
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s11, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    throw ConditioningError("schur_complement: leading block is singular", det, min_eig);
  }
  const Eigen::MatrixXd s12 = sigma.topRightCorner(k, m);
  Eigen::MatrixXd c = sigma.bottomRightCorner(m, m) - s12.transpose() * llt.solve(s12);
  return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd schur_complement(const BlockCovariance& sigma) { return schur_complement(sigma.sigma, sigma.size()); }

ConditionalLaw conditional_zero_law(const BlockCovariance& sigma) {
  ConditionalLaw law;
  law.covariance = schur_complement(sigma);
  law.mean = Eigen::VectorXd::Zero(law.covariance.rows());
  return law;
}

namespace {

double two_point_abs_moment(const Eigen::MatrixXd& c) {
  const double s1 = std::sqrt(std::max(c(0, 0), 0.0));
  const double s2 = std::sqrt(std::max(c(1, 1), 0.0));
  if (s1 == 0.0 || s2 == 0.0) return 0.0;
  const double rho = std::clamp(c(0, 1) / (s1 * s2), -1.0, 1.0);
  return 2.0 / kPi * s1 * s2 * (std::sqrt(1.0 - rho * rho) + rho * std::asin(rho));
}

// E|V1 V2 V3| for V ~ N(0, c): whiten a pair in polar coordinates (w = r(cos t, sin t)),
// write the third as r b(t) + s Z, and integrate r and Z in closed form:
// E[R^2 |R b + s Z|] = sqrt(2/pi) (s (2s^2 + 3b^2) / (s^2 + b^2) + 3 b atan(b/s)), R Rayleigh.
quad::AdaptiveResult three_point_abs_moment(const Eigen::Matrix3d& c, double tol) {
  int third = 0;
  double best = -1.0;
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    const double det = c(i, i) * c(j, j) - c(i, j) * c(i, j);
    const double residual = det > 0.0 ? Eigen::Matrix3d(c).determinant() / det : 0.0;
    if (residual / c(k, k) > best) {
      best = residual / c(k, k);
      third = k;
    }
  }
  const int i = (third + 1) % 3;
  const int j = (third + 2) % 3;
  const double l11 = std::sqrt(c(i, i));
  const double l21 = c(i, j) / l11;
  const double l22 = std::sqrt(std::max(c(j, j) - l21 * l21, 0.0));
  const double b1 = c(third, i) / l11;
  const double b2 = l22 > 1e-300 ? (c(third, j) - l21 * b1) / l22 : 0.0;
  const double s = std::sqrt(std::max(c(third, third) - b1 * b1 - b2 * b2, 0.0));
  const double root = std::sqrt(2.0 / kPi);
  const auto radial = [&](double b) {
    if (s == 0.0) return 1.5 * kPi * root * std::abs(b);
    return root * (s * (2.0 * s * s + 3.0 * b * b) / (s * s + b * b) + 3.0 * b * std::atan(b / s));
  };
  const auto integrand = [&](double t) {
    const double ct = std::cos(t);
    const double st = std::sin(t);
    return std::abs(l11 * ct) * std::abs(l21 * ct + l22 * st) * radial(b1 * ct + b2 * st);
  };
  // kinks where a linear form a cos t + b sin t vanishes
  std::vector<double> breaks{0.0, kPi};
  const auto add_zero = [&](double a, double b) {
    if (a == 0.0 && b == 0.0) return;
    double t = std::atan2(-a, b);
    if (t < 0.0) t += kPi;
    if (t >= kPi) t -= kPi;
    breaks.push_back(t);
  };
  add_zero(l11, 0.0);
  add_zero(l21, l22);
  add_zero(b1, b2);
  std::sort(breaks.begin(), breaks.end());
  const double scale = std::sqrt(c(0, 0) * c(1, 1) * c(2, 2));
  quad::AdaptiveResult total;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] - breaks[k] < 1e-15) continue;
    const auto piece = quad::adaptive_interval(integrand, breaks[k], breaks[k + 1], tol * scale / 4.0, 0.0, 40);
    total.value += piece.value / kPi;
    total.error += piece.error / kPi;
    total.evaluations += piece.evaluations;
    total.converged = total.converged && piece.converged;
  }
  return total;
}

// E prod |Z_a| for Z ~ N(0, R), R a correlation matrix, via the orthant
// decomposition: on each orthant, polar coordinates w = r s with s on the
// simplex integrate out r in closed form.
quad::AdaptiveResult orthant_quadrature(const Eigen::MatrixXd& r, double tol) {
  const int d = static_cast<int>(r.rows());
  const Eigen::MatrixXd rinv = r.inverse();
  const double det = r.determinant();
  const double prefactor = std::pow(2.0 * kPi, -0.5 * d) / std::sqrt(det) * factorial(d - 1) * std::pow(2.0, d - 1);
  const int patterns = 1 << (d - 1);
  // sign vectors with the first entry +1; the mirror image contributes equally
  std::vector<Eigen::MatrixXd> signed_inverse;
  for (int mask = 0; mask < patterns; ++mask) {
    Eigen::VectorXd sigma = Eigen::VectorXd::Ones(d);
    for (int a = 1; a < d; ++a) {
      if (mask & (1 << (a - 1))) sigma(a) = -1.0;
    }
    signed_inverse.push_back(sigma.asDiagonal() * rinv * sigma.asDiagonal());
  }
  const auto integrand = [&](const Eigen::VectorXd& s) {
    double product = s.prod();
    if (product <= 0.0) return 0.0;
    double total = 0.0;
    for (const auto& q : signed_inverse) total += product / std::pow(s.dot(q * s), d);
    return total;
  };

  quad::AdaptiveResult result;
  {
    const auto apply = [&](int order) {
      const auto rule = quad::simplex_rule(d - 1, order);
      double sum = 0.0;
      Eigen::VectorXd s(d);
      for (std::size_t p = 0; p < rule.weights.size(); ++p) {
        for (int a = 0; a < d; ++a) s(a) = rule.barycentric[p][static_cast<std::size_t>(a)];
        sum += rule.weights[p] * integrand(s);
      }
      return sum;
    };
    const int high = d == 4 ? 20 : 14;
    const double coarse = apply(high - 6);
    const double fine = apply(high);
    result.value = fine;
    result.error = std::abs(fine - coarse);
    result.converged = result.error <= tol * std::abs(fine);
  }
  result.value *= 2.0 * prefactor;
  result.error *= 2.0 * prefactor;
  return result;
}

AbsMomentResult monte_carlo_abs_moment(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& weight, long samples,
                                       std::uint64_t seed) {
  const auto dim = cov.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd map = weight * root;
  const int d = static_cast<int>(weight.rows());
  // Y = root * R U with U uniform on the sphere: the radial factor integrates exactly.
  const double radial = std::exp(0.5 * d * std::log(2.0) + std::lgamma(0.5 * (dim + d)) - std::lgamma(0.5 * dim));
  std::mt19937_64 engine = task_engine(seed, 0);
  std::normal_distribution<double> normal;
  const long frames = std::max<long>(2, samples / std::max<Eigen::Index>(dim, 1));
  double mean = 0.0;
  double m2 = 0.0;
  Eigen::MatrixXd g(dim, dim);
  for (long i = 0; i < frames; ++i) {
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) g(a, b) = normal(engine);
    }
    // Columns of a Haar orthogonal matrix form a stratified set of sphere points.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd v = map * q;
    double frame = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) frame += v.col(c).cwiseAbs().prod();
    frame /= static_cast<double>(dim);
    const double delta = frame - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (frame - mean);
  }
  AbsMomentResult out;
  out.value = radial * mean;
  out.error = radial * std::sqrt(m2 / static_cast<double>(frames - 1) / static_cast<double>(frames));
  out.monte_carlo = true;
  return out;
}

}  // namespace

AbsMomentResult gaussian_abs_moment(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& weight,
                                    const AbsMomentOptions& options) {
  check_spd_input(cov, "gaussian_abs_moment");
  if (weight.cols() != cov.rows()) throw ContractError("gaussian_abs_moment: weight/covariance size mismatch");
  const int d = static_cast<int>(weight.rows());
  if (d < 1 || d > kMaxDoubledSize) throw SizeLimitError("gaussian_abs_moment: dimension must lie in [1, 5]");

  if (options.method == AbsMomentOptions::Method::MonteCarlo) {
    return monte_carlo_abs_moment(cov, weight, options.mc_samples, options.seed);
  }
  const Eigen::MatrixXd c = weight * cov * weight.transpose();
  AbsMomentResult out;
  if (d == 1) {
    out.value = std::sqrt(std::max(c(0, 0), 0.0) * 2.0 / kPi);
    return out;
  }
  if (d == 2) {
    out.value = two_point_abs_moment(c);
    return out;
  }
  const Eigen::VectorXd sd = c.diagonal().cwiseMax(0.0).cwiseSqrt();
  if (sd.minCoeff() == 0.0) return out;
  if (d == 3) {
    const auto q = three_point_abs_moment(c, options.tol);
    out.value = q.value;
    out.error = q.error;
    if (q.converged || options.method == AbsMomentOptions::Method::Quadrature) return out;
    return monte_carlo_abs_moment(cov, weight, options.mc_samples, options.seed);
  }
  const Eigen::MatrixXd r = sd.cwiseInverse().asDiagonal() * c * sd.cwiseInverse().asDiagonal();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig > 1e-9) {
    const auto q = orthant_quadrature(r, options.tol);
    if (q.converged || options.method == AbsMomentOptions::Method::Quadrature) {
      const double scale = sd.prod();
      out.value = scale * q.value;
      out.error = scale * q.error;
      return out;
    }
  }
  if (options.method == AbsMomentOptions::Method::Quadrature) {
    throw ToleranceError("gaussian_abs_moment: covariance too degenerate for orthant quadrature", 0.0, min_eig);
  }
  return monte_carlo_abs_moment(cov, weight, options.mc_samples, options.seed);
}

}  // namespace kacrice
