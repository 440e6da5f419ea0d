#include "kacrice/simulate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"

namespace kacrice {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// In-place out_m = sum_j data_j exp(2 pi i j m / N).
void fft_backward(std::vector<cplx>& data) {
  const int n = static_cast<int>(data.size());
  fftw_plan plan = nullptr;
  {
    static std::map<int, std::unique_ptr<fftw_plan_s, PlanDeleter>> plans;
    std::lock_guard lock(fftw_mutex());
    auto it = plans.find(n);
    if (it == plans.end()) {
      std::vector<cplx> scratch(data.size());
      auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
      fftw_plan p = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      if (p == nullptr) throw NumericalError("fft: plan creation failed");
      it = plans.emplace(n, std::unique_ptr<fftw_plan_s, PlanDeleter>(p)).first;
    }
    plan = it->second.get();
  }
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

std::size_t pow2_at_least(double x) {
  std::size_t n = 1;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

void warn_clipped_once(double mass) {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true)) {
    std::clog << "warning: circulant embedding clipped negative eigenvalues (total " << mass << ")\n";
  }
}

}  // namespace

PathSample PathSample::spectral(std::vector<cplx> coefficients, double omega0, double delta, double grid_step_hint,
                                Domain domain) {
  if (coefficients.empty()) throw ContractError("PathSample: no coefficients");
  if (!(delta > 0.0) || !(grid_step_hint > 0.0)) throw ContractError("PathSample: delta and grid step must be positive");
  PathSample p;
  p.coefficients_ = std::move(coefficients);
  p.omega0_ = omega0;
  p.delta_ = delta;
  p.domain_ = domain;
  const std::size_t n = pow2_at_least(std::max(2.0 * static_cast<double>(p.coefficients_.size()),
                                               2.0 * kPi / (delta * grid_step_hint)));
  p.grid_step_ = 2.0 * kPi / (static_cast<double>(n) * delta);
  std::vector<cplx> data(n, cplx(0.0, 0.0));
  std::copy(p.coefficients_.begin(), p.coefficients_.end(), data.begin());
  fft_backward(data);
  p.grid_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double phase = omega0 * static_cast<double>(m) * p.grid_step_;
    p.grid_[m] = (cplx(std::cos(phase), std::sin(phase)) * data[m]).real();
  }
  return p;
}

PathSample PathSample::function(std::function<double(double)> f, std::function<double(double)> df, Domain domain) {
  if (!f) throw ContractError("PathSample: empty function");
  PathSample p;
  p.f_ = std::move(f);
  p.df_ = std::move(df);
  p.domain_ = domain;
  return p;
}

std::pair<double, double> PathSample::value_and_derivative(double x) const {
  if (f_) {
    if (!df_) throw CapabilityError("PathSample: no derivative supplied");
    return {f_(x), df_(x)};
  }
  const cplx z(std::cos(delta_ * x), std::sin(delta_ * x));
  cplx p = coefficients_.back();
  cplx d(0.0, 0.0);
  for (std::size_t j = coefficients_.size() - 1; j-- > 0;) {
    d = d * z + p;
    p = p * z + coefficients_[j];
  }
  const cplx e(std::cos(omega0_ * x), std::sin(omega0_ * x));
  const cplx i(0.0, 1.0);
  return {(e * p).real(), (e * (i * omega0_ * p + i * delta_ * z * d)).real()};
}

double PathSample::value(double x) const {
  if (f_) return f_(x);
  const cplx z(std::cos(delta_ * x), std::sin(delta_ * x));
  cplx p = coefficients_.back();
  for (std::size_t j = coefficients_.size() - 1; j-- > 0;) p = p * z + coefficients_[j];
  return (cplx(std::cos(omega0_ * x), std::sin(omega0_ * x)) * p).real();
}

double PathSample::derivative(double x) const { return value_and_derivative(x).second; }

std::pair<std::vector<double>, std::vector<double>> sample_correlated_coefficients(
    const std::vector<double>& correlation, std::mt19937_64& engine) {
  const std::size_t n = correlation.size();
  if (n == 0) throw ContractError("sample_correlated_coefficients: empty correlation");
  std::normal_distribution<double> normal;
  if (n == 1) {
    const double s = std::sqrt(std::max(correlation[0], 0.0));
    const double a = normal(engine);
    const double b = normal(engine);
    return {{s * a}, {s * b}};
  }
  const std::size_t m = 2 * (n - 1);
  std::vector<cplx> row(m);
  for (std::size_t k = 0; k < m; ++k) row[k] = correlation[k < n ? k : m - k];
  fft_backward(row);
  double top = 0.0;
  for (const auto& v : row) top = std::max(top, v.real());
  double clipped = 0.0;
  std::vector<double> eig(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lambda = row[k].real();
    if (lambda < -1e-8 * top) {
      throw EmbeddingError("sample_correlated_coefficients: circulant embedding is not positive; use a longer embedding",
                           lambda);
    }
    if (lambda < 0.0) clipped += -lambda;
    eig[k] = std::max(lambda, 0.0);
  }
  if (clipped > 0.0) warn_clipped_once(clipped);
  std::vector<cplx> z(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = normal(engine);
    const double im = normal(engine);
    z[k] = std::sqrt(eig[k] / static_cast<double>(m)) * cplx(re, im);
  }
  fft_backward(z);
  std::vector<double> a(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = z[k].real();
    b[k] = z[k].imag();
  }
  return {std::move(a), std::move(b)};
}

PathSample sample_trig_poly(const CovarianceModel& model, std::uint64_t seed, std::uint64_t path_index,
                            double grid_step) {
  if (model.family() != CovarianceModel::Family::TrigPoly &&
      model.family() != CovarianceModel::Family::TrigPolyCorrelated) {
    throw ContractError("sample_trig_poly: model is not a trigonometric polynomial");
  }
  const int n = model.n();
  auto engine = task_engine(seed, path_index);
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
  if (model.family() == CovarianceModel::Family::TrigPoly) {
    std::normal_distribution<double> normal;
    for (auto& v : a) v = normal(engine);
    for (auto& v : b) v = normal(engine);
  } else {
    std::tie(a, b) = sample_correlated_coefficients(model.coefficient_correlation(), engine);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<cplx> c(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) c[static_cast<std::size_t>(k)] = scale * cplx(a[k], -b[k]);
  return PathSample::spectral(std::move(c), 0.0, 1.0 / n, grid_step, model.domain());
}

PathSample sample_stationary(const CovarianceModel& model, std::uint64_t seed, std::uint64_t path_index,
                             const StationaryOptions& options) {
  if (!(options.window > 0.0) || !(options.grid_step > 0.0) || !(options.lag_accuracy > 0.0)) {
    throw ContractError("sample_stationary: window, grid step and lag accuracy must be positive");
  }
  auto engine = task_engine(seed, path_index);
  std::normal_distribution<double> normal;
  switch (model.family()) {
    case CovarianceModel::Family::Sinc: {
      const double omega = model.scale();
      const double bins = std::ceil(omega * options.window / options.lag_accuracy);
      if (bins > 5e7) throw SizeLimitError("sample_stationary: too many spectral bins");
      const std::size_t j = static_cast<std::size_t>(std::max(bins, 1.0));
      const double delta = omega / static_cast<double>(j);
      const double amplitude = std::sqrt(delta / omega);
      std::vector<cplx> c(j);
      for (auto& v : c) {
        const double re = normal(engine);
        const double im = normal(engine);
        v = amplitude * cplx(re, -im);
      }
      return PathSample::spectral(std::move(c), 0.5 * delta, delta, options.grid_step, Domain::line());
    }
    case CovarianceModel::Family::Cosine: {
      const double re = normal(engine);
      const double im = normal(engine);
      const double frequency = model.scale();
      return PathSample::spectral({cplx(re, -im)}, frequency, kPi / options.window, options.grid_step,
                                  Domain::line());
    }
    default:
      throw CapabilityError("sample_stationary: only the sinc and cosine families are stationary on the line");
  }
}

namespace {

class Scanner {
 public:
  Scanner(const PathSample& path, const ZeroOptions& options, ZeroSet& out)
      : path_(path), options_(options), out_(out), small_(0.1 * options.path_scale) {}

  void cell(double x0, double f0, double x1, double f1) {
    if (f0 * f1 < 0.0) {
      out_.zeros.push_back(refine(x0, f0, x1, f1));
    } else if (f0 != 0.0 && f1 != 0.0 && std::abs(f0) < small_ && std::abs(f1) < small_ && options_.rescan_depth > 0) {
      ++out_.diagnostics.rescanned_cells;
      rescan(x0, f0, x1, f1, options_.rescan_depth);
    }
  }

 private:
  void rescan(double x0, double f0, double x1, double f1, int depth) {
    const double xm = 0.5 * (x0 + x1);
    const double fm = path_.value(xm);
    if (fm == 0.0) {
      out_.zeros.push_back(xm);
      ++out_.diagnostics.rescan_zeros;
      return;
    }
    if (f0 * fm < 0.0) {
      out_.zeros.push_back(refine(x0, f0, xm, fm));
      out_.zeros.push_back(refine(xm, fm, x1, f1));
      out_.diagnostics.rescan_zeros += 2;
      return;
    }
    if (depth > 1) {
      if (std::abs(fm) < small_) {
        rescan(x0, f0, xm, fm, depth - 1);
        rescan(xm, fm, x1, f1, depth - 1);
      }
      return;
    }
    if (heading_through_zero(x0, f0, xm, fm) || heading_through_zero(xm, fm, x1, f1)) {
      ++out_.diagnostics.suspected_misses;
    }
  }

  // The cubic Hermite interpolant on the leaf changes sign at one of its critical points.
  bool heading_through_zero(double x0, double f0, double x1, double f1) const {
    double d0 = 0.0;
    double d1 = 0.0;
    try {
      d0 = path_.derivative(x0);
      d1 = path_.derivative(x1);
    } catch (const CapabilityError&) {
      return false;
    }
    const double h = x1 - x0;
    const double c = h * d0;
    const double b = 3.0 * (f1 - f0) - h * (2.0 * d0 + d1);
    const double a = 2.0 * (f0 - f1) + h * (d0 + d1);
    const auto crosses = [&](double t) {
      return t > 0.0 && t < 1.0 && (((a * t + b) * t + c) * t + f0) * f0 < 0.0;
    };
    const double disc = b * b - 3.0 * a * c;
    if (disc < 0.0) return false;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    if (q == 0.0) return false;
    return crosses(c / q) || (a != 0.0 && crosses(q / (3.0 * a)));
  }

  // Illinois false position on a verified sign change.
  double refine(double lo, double flo, double hi, double fhi) {
    const double ftol = 1e-13 * options_.path_scale;
    int side = 0;
    for (int iter = 0; iter < 200; ++iter) {
      if (hi - lo <= options_.refine_tol) break;
      double x = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
      const double fx = path_.value(x);
      ++out_.diagnostics.refinement_iterations;
      if (fx == 0.0 || std::abs(fx) < ftol) return x;
      if ((fx < 0.0) == (flo < 0.0)) {
        lo = x;
        flo = fx;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = x;
        fhi = fx;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
  }

  const PathSample& path_;
  const ZeroOptions& options_;
  ZeroSet& out_;
  double small_;
};

}  // namespace

ZeroSet count_zeros(const PathSample& path, Window window, const ZeroOptions& options) {
  if (!(window.b > window.a)) throw ContractError("count_zeros: empty window");
  if (!(options.grid_step > 0.0) || !(options.refine_tol > 0.0) || !(options.path_scale > 0.0)) {
    throw ContractError("count_zeros: grid step, tolerance and scale must be positive");
  }
  const Domain& domain = path.domain();
  if (domain.kind == Domain::Kind::Circle && window.length() > domain.circumference * (1.0 + 1e-12)) {
    throw ContractError("count_zeros: window longer than the circle");
  }
  if (path.has_grid() && domain.kind == Domain::Kind::Line &&
      (window.a < 0.0 || window.b > path.grid_extent() * (1.0 + 1e-12))) {
    throw ContractError("count_zeros: window outside the sampled domain");
  }

  ZeroSet out;
  out.window = window;
  std::vector<double> xs;
  std::vector<double> fs;
  xs.push_back(window.a);
  fs.push_back(path.value(window.a));
  if (path.has_grid() && path.grid_step() <= options.grid_step) {
    const double h = path.grid_step();
    const long n = static_cast<long>(path.grid().size());
    const long stride = std::max(1L, static_cast<long>(std::floor(options.grid_step / h + 1e-9)));
    for (long m = static_cast<long>(std::floor(window.a / h)) + 1;; m += stride) {
      const double x = static_cast<double>(m) * h;
      if (x >= window.b) break;
      const long idx = ((m % n) + n) % n;
      xs.push_back(x);
      fs.push_back(path.grid()[static_cast<std::size_t>(idx)]);
    }
  } else {
    const long cells = static_cast<long>(std::ceil(window.length() / options.grid_step - 1e-9));
    const double h = window.length() / static_cast<double>(cells);
    for (long m = 1; m < cells; ++m) {
      xs.push_back(window.a + static_cast<double>(m) * h);
      fs.push_back(path.value(xs.back()));
    }
  }
  xs.push_back(window.b);
  fs.push_back(path.value(window.b));
  out.diagnostics.grid_points = static_cast<long>(xs.size());

  Scanner scanner(path, options, out);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (fs[i] == 0.0) out.zeros.push_back(xs[i]);
    scanner.cell(xs[i], fs[i], xs[i + 1], fs[i + 1]);
  }
  std::sort(out.zeros.begin(), out.zeros.end());
  out.zeros.erase(std::remove_if(out.zeros.begin(), out.zeros.end(),
                                 [&](double z) { return z < window.a || z >= window.b; }),
                  out.zeros.end());
  out.zeros.erase(std::unique(out.zeros.begin(), out.zeros.end()), out.zeros.end());
  return out;
}

double linear_statistic(const ZeroSet& zeros, const std::function<double(double)>& phi) {
  double sum = 0.0;
  for (double z : zeros.zeros) sum += phi(z);
  return sum;
}

}  // namespace kacrice
