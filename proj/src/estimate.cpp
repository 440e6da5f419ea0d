#include "kacrice/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kacrice/errors.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/partitions.hpp"

namespace kacrice {

namespace {

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Half-open [begin, end) of batch b among n samples.
std::pair<std::size_t, std::size_t> batch_range(std::size_t n, int batches, int b) {
  const std::size_t base = n / static_cast<std::size_t>(batches);
  const std::size_t extra = n % static_cast<std::size_t>(batches);
  const auto bb = static_cast<std::size_t>(b);
  const std::size_t begin = bb * base + std::min(bb, extra);
  return {begin, begin + base + (bb < extra ? 1 : 0)};
}

std::vector<double> without_batch(const std::vector<double>& x, int batches, int b) {
  const auto [begin, end] = batch_range(x.size(), batches, b);
  std::vector<double> out;
  out.reserve(x.size() - (end - begin));
  out.insert(out.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(begin));
  out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(end), x.end());
  return out;
}

// sqrt((B-1)/B sum (theta_b - mean)^2) for each component.
std::vector<double> jackknife_errors(const std::vector<std::vector<double>>& leave_out) {
  const std::size_t b = leave_out.size();
  const std::size_t k = leave_out.front().size();
  std::vector<double> err(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double m = 0.0;
    for (const auto& t : leave_out) m += t[j];
    m /= static_cast<double>(b);
    double ss = 0.0;
    for (const auto& t : leave_out) ss += (t[j] - m) * (t[j] - m);
    err[j] = std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
  }
  return err;
}

std::vector<double> normalized_moments(const std::vector<double>& x) {
  const double m = mean_of(x);
  std::vector<double> central(7, 0.0);
  for (double v : x) {
    const double d = v - m;
    double pw = d * d;
    for (int p = 2; p <= 6; ++p) {
      central[static_cast<std::size_t>(p)] += pw;
      pw *= d;
    }
  }
  for (double& c : central) c /= static_cast<double>(x.size());
  std::vector<double> out;
  const double var = central[2];
  if (!(var > 0.0)) throw ContractError("clt_report: samples have zero variance");
  for (int p = 2; p <= 6; ++p) out.push_back(central[static_cast<std::size_t>(p)] / std::pow(var, 0.5 * p));
  return out;
}

}  // namespace

std::vector<double> plugin_cumulants(const std::vector<double>& samples, int p_max) {
  if (samples.empty()) throw ContractError("plugin_cumulants: no samples");
  if (p_max < 1 || p_max > 6) throw ContractError("plugin_cumulants: p_max must lie in [1, 6]");
  const double shift = mean_of(samples);
  std::vector<double> moments(static_cast<std::size_t>(p_max), 0.0);
  for (double v : samples) {
    const double d = v - shift;
    double pw = d;
    for (int p = 1; p <= p_max; ++p) {
      moments[static_cast<std::size_t>(p - 1)] += pw;
      pw *= d;
    }
  }
  for (double& m : moments) m /= static_cast<double>(samples.size());
  std::vector<double> k = cumulants_from_moments(moments);
  k[0] += shift;
  return k;
}

std::vector<CumulantEstimate> mc_cumulants(const std::vector<double>& samples, int p_max, int n_batches,
                                           double scale) {
  if (n_batches < 2) throw ContractError("mc_cumulants: at least two batches are required");
  if (samples.size() < 10 * static_cast<std::size_t>(n_batches)) {
    throw ContractError("mc_cumulants: need at least 10 samples per batch");
  }
  if (!(scale > 0.0)) throw ContractError("mc_cumulants: scale must be positive");
  const std::vector<double> full = plugin_cumulants(samples, p_max);
  std::vector<std::vector<double>> leave_out;
  for (int b = 0; b < n_batches; ++b) leave_out.push_back(plugin_cumulants(without_batch(samples, n_batches, b), p_max));
  const std::vector<double> err = jackknife_errors(leave_out);
  std::vector<CumulantEstimate> out;
  for (int p = 1; p <= p_max; ++p) {
    CumulantEstimate e;
    e.p = p;
    e.value = full[static_cast<std::size_t>(p - 1)];
    e.std_error = err[static_cast<std::size_t>(p - 1)];
    e.scale = scale;
    e.normalization = scale == 1.0 ? CumulantEstimate::Normalization::Raw : CumulantEstimate::Normalization::PerLength;
    out.push_back(e);
  }
  return out;
}

CltReport clt_report(const std::vector<double>& samples, int n_batches) {
  if (samples.size() < 1000) throw ContractError("clt_report: need at least 1000 samples");
  if (n_batches < 2) throw ContractError("clt_report: at least two batches are required");
  CltReport r;
  r.sample_size = static_cast<long>(samples.size());
  r.orders = {2, 3, 4, 5, 6};
  r.targets = {1.0, 0.0, 3.0, 0.0, 15.0};
  r.moments = normalized_moments(samples);
  std::vector<std::vector<double>> leave_out;
  for (int b = 0; b < n_batches; ++b) leave_out.push_back(normalized_moments(without_batch(samples, n_batches, b)));
  r.std_errors = jackknife_errors(leave_out);
  for (std::size_t i = 0; i < r.orders.size(); ++i) {
    r.deviations.push_back(r.moments[i] - r.targets[i]);
    // p = 2 is identically 1 after normalization; it is never flagged.
    r.flagged.push_back(std::abs(r.deviations[i]) > 3.0 * r.std_errors[i] && r.orders[i] != 2);
  }
  return r;
}

std::vector<double> simulate_zero_counts(const CovarianceModel& model, double window, const CountOptions& options,
                                         ZeroDiagnostics* totals) {
  if (options.paths < 1) throw ContractError("simulate_zero_counts: paths must be positive");
  const bool trig = model.family() == CovarianceModel::Family::TrigPoly ||
                    model.family() == CovarianceModel::Family::TrigPolyCorrelated;
  if (!trig && !(window > 0.0)) throw ContractError("simulate_zero_counts: window must be positive");
  ZeroOptions zero;
  zero.grid_step = options.grid_step;
  zero.refine_tol = options.refine_tol;
  if (trig && model.family() == CovarianceModel::Family::TrigPolyCorrelated) {
    zero.path_scale = std::sqrt(model.kernel(0, 0, 0.0, 0.0));
  }
  StationaryOptions stationary;
  stationary.window = window;
  stationary.grid_step = options.grid_step;
  stationary.lag_accuracy = options.lag_accuracy;
  std::vector<double> counts(static_cast<std::size_t>(options.paths));
  std::vector<ZeroDiagnostics> diagnostics(counts.size());
  parallel_for(counts.size(), options.workers, [&](std::size_t i) {
    ZeroSet zeros;
    if (trig) {
      const PathSample path = sample_trig_poly(model, options.seed, i, options.grid_step);
      zeros = count_zeros(path, {0.0, path.domain().circumference}, zero);
    } else {
      const PathSample path = sample_stationary(model, options.seed, i, stationary);
      zeros = count_zeros(path, {0.0, window}, zero);
    }
    counts[i] = static_cast<double>(zeros.count());
    diagnostics[i] = zeros.diagnostics;
  });
  if (totals != nullptr) {
    *totals = {};
    for (const auto& d : diagnostics) {
      totals->grid_points += d.grid_points;
      totals->refinement_iterations += d.refinement_iterations;
      totals->rescanned_cells += d.rescanned_cells;
      totals->rescan_zeros += d.rescan_zeros;
      totals->suspected_misses += d.suspected_misses;
    }
  }
  return counts;
}

std::vector<ScanRow> convergence_scan(ScanFamily family, const std::vector<double>& parameters, int p_max,
                                      const CountOptions& options, int n_batches) {
  if (parameters.empty()) throw ContractError("convergence_scan: empty parameter grid");
  if (!std::is_sorted(parameters.begin(), parameters.end())) {
    throw ContractError("convergence_scan: parameter grid must be ascending");
  }
  double work = 0.0;
  for (double v : parameters) {
    if (!(v > 0.0)) throw ContractError("convergence_scan: parameters must be positive");
    work += v * static_cast<double>(options.paths);
  }
  if (work > 1e9) throw SizeLimitError("convergence_scan: paths times window exceeds the budget");
  std::vector<ScanRow> rows;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    CountOptions local = options;
    local.seed = splitmix64(options.seed + i);
    const double v = parameters[i];
    std::vector<double> counts;
    if (family == ScanFamily::TrigPoly) {
      counts = simulate_zero_counts(CovarianceModel::trig_poly(static_cast<int>(std::lround(v))), 0.0, local);
    } else {
      counts = simulate_zero_counts(CovarianceModel::sinc(1.0), v, local);
    }
    rows.push_back({v, mc_cumulants(counts, p_max, n_batches, v)});
  }
  return rows;
}

}  // namespace kacrice
