#include "kacrice/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <unordered_map>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/quadrature.hpp"

namespace kacrice {

double gamma1(const CovarianceModel& model) {
  const double r0 = model.limit(0, 0.0);
  const double r2 = model.limit(2, 0.0);
  if (!(r0 > 0.0)) throw ModelError("gamma1: r(0) must be positive");
  if (!(r2 < 0.0)) throw CapabilityError("gamma1: r''(0) must be negative for a finite zero intensity");
  return std::sqrt(-r2 / r0) / std::numbers::pi;
}

double f_k_infinity(const CovarianceModel& model, const std::vector<double>& offsets, const KacOptions& options) {
  std::vector<double> nodes{0.0};
  nodes.insert(nodes.end(), offsets.begin(), offsets.end());
  return cumulant_kac_density(model.limit_model(), NodeVector(nodes), options).value;
}

namespace {

// Stationary Kac densities with the pair density cached by gap.
class StationaryDensities {
 public:
  StationaryDensities(const CovarianceModel& model, const KacOptions& options)
      : model_(model.limit_model()), options_(options) {
    rho1_ = rho(model_, NodeVector({0.0}), options_).value;
  }

  double rho1() const { return rho1_; }

  double rho2(double gap) {
    gap = std::abs(gap);
    {
      std::lock_guard lock(mutex_);
      const auto it = pairs_.find(gap);
      if (it != pairs_.end()) return it->second;
    }
    const double value = rho(model_, NodeVector({0.0, gap}), options_).value;
    std::lock_guard lock(mutex_);
    pairs_.emplace(gap, value);
    return value;
  }

  double f2(double x) { return rho2(x) - rho1_ * rho1_; }

  double f3(double x, double y) {
    const double r3 = rho(model_, NodeVector({0.0, x, y}), options_).value;
    return r3 - rho1_ * (rho2(x) + rho2(y) + rho2(y - x)) + 2.0 * rho1_ * rho1_ * rho1_;
  }

 private:
  CovarianceModel model_;
  KacOptions options_;
  double rho1_ = 0.0;
  std::mutex mutex_;
  std::unordered_map<double, double> pairs_;
};

struct Marginal {
  std::vector<double> y;
  std::vector<double> weight;
  std::vector<double> value;

  double integral() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += weight[i] * value[i];
    return sum;
  }

  // max over the last half-window of y^2 |m(y)|: m(y) <= K / y^2 beyond T gives a tail K / T.
  double tail_constant(double truncation) const {
    double k = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] >= 0.5 * truncation) k = std::max(k, y[i] * y[i] * std::abs(value[i]));
    }
    return k;
  }

  // c / T with c fitted so that int_{T/2}^T c / y^2 dy matches the computed marginal.
  double tail_fit(double truncation) const {
    double half = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] >= 0.5 * truncation) half += weight[i] * value[i];
    }
    return half;
  }
};

int panels_for(double length) { return std::max(1, static_cast<int>(std::ceil(length - 1e-12))); }

Marginal marginal_f2(StationaryDensities& densities, double truncation, int order, int workers) {
  const quad::Rule outer = quad::composite(order, 0.0, truncation, panels_for(truncation));
  Marginal m{outer.nodes, outer.weights, std::vector<double>(outer.nodes.size())};
  parallel_for(outer.nodes.size(), workers, [&](std::size_t i) { m.value[i] = densities.f2(outer.nodes[i]); });
  return m;
}

Marginal marginal_f3(StationaryDensities& densities, double truncation, int order, int workers) {
  const quad::Rule outer = quad::composite(order, 0.0, truncation, panels_for(truncation));
  Marginal m{outer.nodes, outer.weights, std::vector<double>(outer.nodes.size())};
  parallel_for(outer.nodes.size(), workers, [&](std::size_t i) {
    const double y = outer.nodes[i];
    const quad::Rule inner = quad::composite(order, 0.0, y, panels_for(y));
    double sum = 0.0;
    for (std::size_t j = 0; j < inner.nodes.size(); ++j) sum += inner.weights[j] * densities.f3(inner.nodes[j], y);
    m.value[i] = sum;
  });
  return m;
}

IntegralEstimate monte_carlo_f4(const CovarianceModel& model, const GammaOptions& options) {
  const double t = options.truncation_high;
  const double volume = t * t * t / 6.0;
  const long points = std::max<long>(options.mc_points, 2);
  std::vector<double> values(static_cast<std::size_t>(points));
  KacOptions kac;
  kac.eta = options.eta;
  kac.moment.mc_samples = options.mc_samples;
  parallel_for(values.size(), options.workers, [&](std::size_t i) {
    auto engine = task_engine(options.seed, i);
    std::uniform_real_distribution<double> uniform(0.0, t);
    std::vector<double> x{uniform(engine), uniform(engine), uniform(engine)};
    std::sort(x.begin(), x.end());
    KacOptions local = kac;
    local.moment.seed = splitmix64(options.seed ^ (i + 1));
    values[i] = f_k_infinity(model, x, local);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(points);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(points - 1);
  IntegralEstimate out;
  out.value = 24.0 * volume * mean;
  out.error = 24.0 * volume * std::sqrt(var / static_cast<double>(points));
  out.evaluations = points;
  out.monte_carlo = true;
  return out;
}

}  // namespace

IntegralEstimate f_k_infinity_integral(const CovarianceModel& model, int k, const GammaOptions& options) {
  if (k < 2 || k > 4) throw ContractError("f_k_infinity_integral: k must lie in [2, 4]");
  if (options.order < 4) throw ContractError("f_k_infinity_integral: order must be at least 4");
  if (k == 4) return monte_carlo_f4(model, options);

  KacOptions kac;
  kac.eta = options.eta;
  StationaryDensities densities(model, kac);
  const double truncation = k == 2 ? options.truncation : options.truncation_high;
  if (!(truncation > 0.0)) throw ContractError("f_k_infinity_integral: truncation must be positive");
  const int low_order = std::max(3, (2 * options.order) / 3);
  // Ordered-region symmetry: 2 orderings of {0, x}, 6 of {0, x, y}.
  const double symmetry = k == 2 ? 2.0 : 6.0;
  const auto marginal = [&](int order) {
    return k == 2 ? marginal_f2(densities, truncation, order, options.workers)
                  : marginal_f3(densities, truncation, order, options.workers);
  };
  const Marginal fine = marginal(options.order);
  const Marginal coarse = marginal(low_order);

  IntegralEstimate out;
  out.value = symmetry * fine.integral();
  out.error = symmetry * std::abs(fine.integral() - coarse.integral());
  out.tail_bound = symmetry * fine.tail_constant(truncation) / truncation;
  out.tail_estimate = symmetry * fine.tail_fit(truncation);
  for (const Marginal* m : {&fine, &coarse}) {
    out.evaluations += static_cast<long>(m->y.size());
    if (k == 3) {
      for (double y : m->y) out.evaluations += static_cast<long>(panels_for(y) * (m == &fine ? options.order : low_order));
    }
  }
  return out;
}

GammaEntry combine_gamma(const std::map<int, IntegralEstimate>& integrals, int p) {
  GammaEntry entry;
  for (int k = 1; k <= p; ++k) {
    const double s = static_cast<double>(stirling2(p, k));
    const auto it = integrals.find(k);
    if (it == integrals.end()) throw ContractError("combine_gamma: missing integral of order " + std::to_string(k));
    // The fitted tail is applied as a correction; half of it is charged as error.
    entry.value += s * (it->second.value + it->second.tail_estimate);
    entry.error += s * (it->second.error + 0.5 * std::abs(it->second.tail_estimate));
  }
  return entry;
}

GammaTable gamma_table(const CovarianceModel& model, int p, const GammaOptions& options) {
  if (p < 1 || p > 4) throw ContractError("gamma_table: p must lie in [1, 4]");
  GammaTable table;
  table.truncation = options.truncation;
  table.integrals[1] = {gamma1(model), 0.0, 0.0, 0.0, 0, false};
  for (int k = 2; k <= p; ++k) table.integrals[k] = f_k_infinity_integral(model, k, options);
  for (int q = 1; q <= p; ++q) table.gamma[q] = combine_gamma(table.integrals, q);
  return table;
}

GammaEntry gamma_p(const CovarianceModel& model, int p, const GammaOptions& options) {
  return gamma_table(model, p, options).gamma.at(p);
}

}  // namespace kacrice
