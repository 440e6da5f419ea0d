#include "kacrice/selfcheck.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "kacrice/divided_diff.hpp"
#include "kacrice/errors.hpp"
#include "kacrice/gaussian.hpp"
#include "kacrice/kac.hpp"
#include "kacrice/parallel.hpp"
#include "kacrice/partitions.hpp"

namespace kacrice {

bool SuiteSummary::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

using Clock = std::chrono::steady_clock;

class Suite {
 public:
  explicit Suite(std::string name) { summary_.suite = std::move(name); }

  // Records `measured <= tolerance`; exceptions count as failures.
  void check(const std::string& name, double tolerance, const std::function<double()>& body) {
    check_range(name, 0.0, tolerance, body);
  }

  void check_range(const std::string& name, double lower, double upper, const std::function<double()>& body) {
    CheckResult r;
    r.suite = summary_.suite;
    r.name = name;
    r.lower = lower;
    r.upper = upper;
    const auto t0 = Clock::now();
    try {
      r.measured = body();
      r.passed = r.measured >= lower && r.measured <= upper;
    } catch (const std::exception&) {
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.passed = false;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    summary_.seconds += r.seconds;
    summary_.checks.push_back(r);
  }

  SuiteSummary take() { return std::move(summary_); }

 private:
  SuiteSummary summary_;
};

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
  return g * g.transpose() / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

// Doubled index of (1,a) is a, of (2,a) is n + a.
std::vector<int> doubled_indices(const Block& cell, int n) {
  std::vector<int> idx;
  for (int a : cell) idx.push_back(a);
  for (int a : cell) idx.push_back(n + a);
  return idx;
}

Eigen::MatrixXd block_diagonal_sigma(const SetPartition& partition, std::mt19937_64& rng) {
  const int n = partition.ground_size();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (const auto& cell : partition.blocks()) {
    const auto idx = doubled_indices(cell, n);
    const Eigen::MatrixXd s = random_spd(static_cast<int>(idx.size()), rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sigma(idx[i], idx[j]) = s(static_cast<int>(i), static_cast<int>(j));
  }
  return sigma;
}

Eigen::MatrixXd block_diagonal_weight(const SetPartition& partition, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const int n = partition.ground_size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& cell : partition.blocks())
    for (int a : cell)
      for (int b : cell) m(a, b) = normal(rng);
  return m;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(static_cast<int>(i), static_cast<int>(j)) = m(idx[i], idx[j]);
  return out;
}

double factorization_error(const SetPartition& partition, std::mt19937_64& rng) {
  const int n = partition.ground_size();
  const Eigen::MatrixXd sigma = block_diagonal_sigma(partition, rng);
  const Eigen::MatrixXd m = block_diagonal_weight(partition, rng);
  const double whole = rho_tilde(m, sigma).value;
  double product = 1.0;
  for (const auto& cell : partition.blocks()) {
    const std::vector<int> cell_idx(cell.begin(), cell.end());
    product *= rho_tilde(restrict(m, cell_idx), restrict(sigma, doubled_indices(cell, n))).value;
  }
  return std::abs(whole - product) / std::abs(product);
}

SuiteSummary factorization_suite(std::uint64_t seed) {
  Suite s("factorization");
  auto rng = task_engine(seed, 1);
  s.check("rho~ product, two singletons", 1e-10, [&] {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) worst = std::max(worst, factorization_error(SetPartition::singletons(2), rng));
    return worst;
  });
  s.check("rho~ product, {{0,1},{2}}", 1e-8, [&] {
    const SetPartition p({{0, 1}, {2}}, 3);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) worst = std::max(worst, factorization_error(p, rng));
    return worst;
  });
  return s.take();
}

SuiteSummary cancellation_suite(std::uint64_t seed) {
  Suite s("f-tilde cancellation");
  auto rng = task_engine(seed, 2);
  const auto run = [&](const NodeVector& nodes, const SetPartition& partition) {
    const DoubledMatrices dm = doubled_matrices(nodes, partition);
    const Eigen::MatrixXd sigma = block_diagonal_sigma(partition, rng);
    return std::abs(f_tilde(dm, sigma).value);
  };
  s.check("two distant nodes, singletons", 1e-8, [&] { return run(NodeVector({0.0, 3.0}), SetPartition::singletons(2)); });
  s.check("cluster plus a distant node", 1e-8,
          [&] { return run(NodeVector({0.0, 0.3, 4.0}), SetPartition({{0, 1}, {2}}, 3)); });
  s.check("three singletons", 1e-8, [&] { return run(NodeVector({0.0, 2.0, 5.0}), SetPartition::singletons(3)); });
  return s.take();
}

SuiteSummary perturbation_suite(std::uint64_t seed) {
  Suite s("quadratic perturbation");
  auto rng = task_engine(seed, 3);
  s.check_range("fitted exponent", 1.85, 2.15, [&] {
    const SetPartition p = SetPartition::singletons(2);
    const Eigen::MatrixXd sigma = block_diagonal_sigma(p, rng);
    const Eigen::MatrixXd m = block_diagonal_weight(p, rng);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
    for (int i : {0, 2})
      for (int j : {1, 3}) h(i, j) = h(j, i) = normal(rng);
    const double base = rho_tilde(m, sigma).value;
    std::vector<double> lx, ly;
    for (double eps = 0.1; eps > 1e-3; eps *= 0.5) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(std::abs(rho_tilde(m, sigma + eps * h).value - base)));
    }
    const double k = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  });
  return s.take();
}

std::vector<double> random_nodes(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = u(rng);
  return x;
}

SuiteSummary interpolation_suite(std::uint64_t seed) {
  Suite s("interpolation matrices");
  auto rng = task_engine(seed, 4);
  s.check("Vandermonde determinant", 1e-12, [&] {
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
      for (int t = 0; t < 10; ++t) {
        const auto x = random_nodes(n, rng);
        double vdm = 1.0;
        for (int a = 0; a < n; ++a)
          for (int b = a + 1; b < n; ++b) vdm *= x[static_cast<std::size_t>(b)] - x[static_cast<std::size_t>(a)];
        worst = std::max(worst, std::abs(interp_matrix(x).determinant() - vdm) / std::max(1.0, std::abs(vdm)));
      }
    }
    return worst;
  });
  s.check("transfer chain rule", 1e-10, [&] {
    const SetPartition coarse = SetPartition::single_block(5);
    const SetPartition middle({{0, 1, 2}, {3, 4}}, 5);
    const SetPartition fine({{0, 1}, {2}, {3}, {4}}, 5);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const NodeVector x(random_nodes(5, rng));
      const Eigen::MatrixXd direct = transfer_matrix(x, coarse, fine);
      const Eigen::MatrixXd chained = transfer_matrix(x, middle, fine) * transfer_matrix(x, coarse, middle);
      worst = std::max(worst, (direct - chained).cwiseAbs().maxCoeff() / std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
    return worst;
  });
  return s.take();
}

SuiteSummary cumulant_suite(std::uint64_t seed) {
  Suite s("moments and cumulants");
  auto rng = task_engine(seed, 5);
  std::normal_distribution<double> normal;
  s.check("round trip, p <= 8", 1e-12, [&] {
    double worst = 0.0;
    for (int p = 1; p <= 8; ++p) {
      std::vector<double> k(static_cast<std::size_t>(p));
      for (auto& v : k) v = normal(rng);
      std::vector<double> magnitude(k.size());
      std::transform(k.begin(), k.end(), magnitude.begin(), [](double v) { return std::abs(v); });
      const auto back = cumulants_from_moments(moments_from_cumulants(k));
      // Error relative to the sum of absolute partition terms.
      const auto scale = moments_from_cumulants(magnitude);
      for (std::size_t i = 0; i < k.size(); ++i) {
        worst = std::max(worst, std::abs(back[i] - k[i]) / std::max(1.0, scale[i]));
      }
    }
    return worst;
  });
  s.check("independence cancellation", 1e-12, [&] {
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n) {
      // Family split into the first `cut` members and the rest; moments factorize.
      const int cut = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
      const SubsetMask low = (SubsetMask{1} << cut) - 1;
      std::map<SubsetMask, double> m1, m2;
      m1[0] = m2[0] = 1.0;
      std::map<SubsetMask, double> moments;
      for (SubsetMask mask = 1; mask < (SubsetMask{1} << n); ++mask) {
        const SubsetMask a = mask & low;
        const SubsetMask b = mask & ~low;
        if (!m1.count(a)) m1[a] = normal(rng);
        if (!m2.count(b)) m2[b] = normal(rng);
        moments[mask] = m1[a] * m2[b];
      }
      double scale = 0.0;
      for (const auto& [mask, v] : moments) scale = std::max(scale, std::abs(v));
      worst = std::max(worst, std::abs(joint_cumulant(n, moments)) / std::pow(std::max(1.0, scale), n));
    }
    return worst;
  });
  return s.take();
}

SuiteSummary hermite_genocchi_suite(std::uint64_t seed) {
  Suite s("hermite-genocchi");
  auto rng = task_engine(seed, 6);
  const SmoothFunction sine{[](int k, double x) {
                              switch (k % 4) {
                                case 0: return std::sin(x);
                                case 1: return std::cos(x);
                                case 2: return -std::sin(x);
                                default: return -std::cos(x);
                              }
                            },
                            CovarianceModel::kMaxDerivativeOrder};
  const SmoothFunction expo{[](int, double x) { return std::exp(x); }, CovarianceModel::kMaxDerivativeOrder};
  s.check("distinct and confluent nodes", 1e-8, [&] {
    double worst = 0.0;
    for (int n = 1; n <= 5; ++n) {
      for (int t = 0; t < 4; ++t) {
        auto x = random_nodes(n, rng);
        if (n >= 2) x.back() = x.front();
        for (const SmoothFunction* f : {&sine, &expo}) {
          worst = std::max(worst, rel(hermite_genocchi(*f, x).value, divided_difference(*f, x)));
        }
      }
    }
    return worst;
  });
  return s.take();
}

SuiteSummary schur_suite(std::uint64_t seed) {
  Suite s("schur complement");
  auto rng = task_engine(seed, 7);
  s.check("det Sigma = det Sigma11 det Sigma^c", 1e-10, [&] {
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const Eigen::MatrixXd sigma = random_spd(2 * k, rng);
      const double lhs = sigma.determinant();
      const double rhs = sigma.topLeftCorner(k, k).determinant() * schur_complement(sigma, k).determinant();
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
    return worst;
  });
  s.check("inverse of Sigma^c = (Sigma^-1)^22", 1e-10, [&] {
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const Eigen::MatrixXd sigma = random_spd(2 * k, rng);
      const Eigen::MatrixXd lhs = schur_complement(sigma, k).inverse();
      const Eigen::MatrixXd rhs = sigma.inverse().bottomRightCorner(k, k);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
    }
    return worst;
  });
  s.check("conditional law by rejection sampling", 0.05, [&] {
    const BlockCovariance sigma =
        dd_covariance(CovarianceModel::sinc(1.0), SetPartition::singletons(2), NodeVector({0.0, 2.0}));
    const ConditionalLaw law = conditional_zero_law(sigma);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma.sigma);
    const Eigen::MatrixXd l = llt.matrixL();
    std::normal_distribution<double> normal;
    const double eps = 0.04;
    Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
    long kept = 0;
    Eigen::Vector4d z;
    while (kept < 40000) {
      for (int i = 0; i < 4; ++i) z(i) = normal(rng);
      const Eigen::Vector4d x = l * z;
      if (std::abs(x(0)) < eps && std::abs(x(1)) < eps) {
        second += x.tail<2>() * x.tail<2>().transpose();
        ++kept;
      }
    }
    second /= static_cast<double>(kept);
    return (second - law.covariance).norm() / law.covariance.norm();
  });
  return s.take();
}

SuiteSummary positivity_suite(std::uint64_t seed) {
  Suite s("covariance positivity");
  auto rng = task_engine(seed, 8);
  s.check("random clustered configurations", 0.0, [&] {
    std::uniform_real_distribution<double> gap(0.02, 0.2);
    std::uniform_real_distribution<double> jump(1.0, 3.0);
    std::uniform_int_distribution<int> size(1, 5);
    const std::vector<CovarianceModel> models{CovarianceModel::sinc(1.0), CovarianceModel::trig_poly(40),
                                              CovarianceModel::trig_poly_ar1(40, 0.4)};
    double failures = 0.0;
    for (int t = 0; t < 60; ++t) {
      const int n = size(rng);
      std::vector<double> x{0.0};
      while (static_cast<int>(x.size()) < n) x.push_back(x.back() + (rng() % 2 ? gap(rng) : jump(rng)));
      const CovarianceModel& model = models[static_cast<std::size_t>(t) % models.size()];
      const NodeVector nodes(x, model.domain());
      const ClusterPartition cluster = cluster_partition(nodes, 0.25);
      const BlockCovariance sigma = dd_covariance(model, cluster.partition, nodes);
      const Eigen::VectorXd d = sigma.sigma.diagonal().cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd corr = d.asDiagonal() * sigma.sigma * d.asDiagonal();
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
      // Four or five clustered nodes push the smallest eigenvalue down to rounding level.
      const double floor = n <= 3 ? 0.0 : -1e-13;
      const Eigen::LLT<Eigen::MatrixXd> llt11(sigma.sigma11());
      if (!(eig.eigenvalues().minCoeff() > floor) || llt11.info() != Eigen::Success) failures += 1.0;
    }
    return failures;
  });
  return s.take();
}

}  // namespace

std::vector<SuiteSummary> run_property_suites(std::uint64_t seed) {
  return {factorization_suite(seed), cancellation_suite(seed), perturbation_suite(seed), interpolation_suite(seed),
          cumulant_suite(seed),      hermite_genocchi_suite(seed), schur_suite(seed),     positivity_suite(seed)};
}

SuiteSummary injected_failure_suite() {
  Suite s("injected failure");
  s.check("forced failure", 0.0, [] { return 1.0; });
  return s.take();
}

}  // namespace kacrice
