#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kacrice/errors.hpp"
#include "kacrice/kac.hpp"

using namespace kacrice;

namespace {

const double kSincIntensity = 1.0 / (std::numbers::pi * std::sqrt(3.0));

double cross_scale(const CovarianceModel& m, double d) {
  const auto s = dd_covariance(m, SetPartition::singletons(2), NodeVector({0.0, d}));
  return std::max({std::abs(s.sigma(0, 1)), std::abs(s.sigma(0, 3)), std::abs(s.sigma(2, 1)), std::abs(s.sigma(2, 3))});
}

}  // namespace

TEST_CASE("matrix-form density") {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
  sigma(0, 0) = 1.0;
  sigma(1, 1) = 1.0 / 3.0;
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  CHECK(rho_tilde(one, sigma).value == doctest::Approx(kSincIntensity).epsilon(1e-9));
  CHECK_THROWS_AS(rho_tilde(Eigen::MatrixXd::Identity(2, 2), sigma), ContractError);
}

TEST_CASE("one-point densities") {
  CHECK(rho(CovarianceModel::sinc(), NodeVector({0.0})).value == doctest::Approx(kSincIntensity).epsilon(1e-6));
  CHECK(rho(CovarianceModel::sinc(2.0), NodeVector({3.0})).value ==
        doctest::Approx(2.0 * kSincIntensity).epsilon(1e-6));
  CHECK(rho(CovarianceModel::cosine(), NodeVector({0.4})).value == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-9));

  const int n = 50;
  const auto trig = CovarianceModel::trig_poly(n);
  const double mid = std::numbers::pi * n;
  const double value = rho(trig, NodeVector({mid}, trig.domain())).value;
  const double exact = std::sqrt((n - 1.0) * (2.0 * n - 1.0) / (6.0 * n * n)) / std::numbers::pi;
  CHECK(value == doctest::Approx(exact).epsilon(1e-9));
  CHECK(std::abs(value / kSincIntensity - 1.0) < 0.02);
}

TEST_CASE("two-point densities") {
  const auto m = CovarianceModel::sinc();
  const auto diag = rho(m, NodeVector({1.0, 1.0}));
  CHECK(diag.value == 0.0);
  CHECK(diag.partition_used.partition == SetPartition::single_block(2));

  const double r1 = rho(m, NodeVector({0.0})).value;
  const double far = rho(m, NodeVector({0.0, 50.0})).value;
  CHECK(std::abs(far - r1 * r1) <= 10.0 * std::pow(m.envelope(49.0), 2));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double base = rho(m, NodeVector({a, b, c})).value;
    CHECK(base >= 0.0);
    CHECK(rho(m, NodeVector({c, a, b})).value == doctest::Approx(base).epsilon(1e-8));
  }
}

TEST_CASE("regime switch at eta") {
  const auto m = CovarianceModel::sinc();
  KacOptions options;
  options.eta = 0.2;
  const auto pair = SetPartition::single_block(2);
  const auto apart = SetPartition::singletons(2);
  for (double gap : {0.199, 0.201}) {
    const NodeVector x({0.0, gap});
    const double merged = rho_with_partition(m, x, pair, options).value;
    const double split = rho_with_partition(m, x, apart, options).value;
    CHECK(merged == doctest::Approx(split).epsilon(1e-8));
  }
  const double below = rho(m, NodeVector({0.0, 0.199}), options).value;
  const double above = rho(m, NodeVector({0.0, 0.201}), options).value;
  const double slope =
      (rho(m, NodeVector({0.0, 0.2005}), options).value - rho(m, NodeVector({0.0, 0.1995}), options).value) / 0.001;
  CHECK(std::abs(above - below) <= 1.1 * std::abs(slope) * 0.002);
}

TEST_CASE("cumulant Kac density") {
  const auto m = CovarianceModel::sinc();
  const double r1 = rho(m, NodeVector({0.0})).value;
  CHECK(cumulant_kac_density(m, NodeVector({0.7})).value == doctest::Approx(r1));
  const NodeVector two({0.0, 1.3});
  CHECK(cumulant_kac_density(m, two).value == doctest::Approx(rho(m, two).value - r1 * r1).epsilon(1e-10));
  CHECK(std::abs(cumulant_kac_density(m, NodeVector({0.0, 40.0, 80.0})).value) < 5e-3);
  CHECK_THROWS_AS(cumulant_kac_density(m, NodeVector({0.0, 1.0, 2.0, 3.0, 4.0})), SizeLimitError);

  double worst_ratio = 0.0;
  for (double d : {5.0, 10.0}) {
    worst_ratio = std::max(worst_ratio, std::abs(cumulant_kac_density(m, NodeVector({0.0, d})).value) /
                                            std::pow(cross_scale(m, d), 2));
  }
  for (double d : {20.0, 40.0, 80.0}) {
    const double ratio = std::abs(cumulant_kac_density(m, NodeVector({0.0, d})).value) / std::pow(cross_scale(m, d), 2);
    CHECK(ratio <= 2.0 * worst_ratio);
  }
}

TEST_CASE("matrix-form cumulant density") {
  const auto m = CovarianceModel::sinc();
  for (const auto& x : {NodeVector({0.0, 0.1}), NodeVector({0.0, 1.7}), NodeVector({0.0, 0.1, 1.0})}) {
    const auto part = cluster_partition(x, 0.25).partition;
    const auto sigma = dd_covariance(m, part, x).sigma;
    const auto dm = doubled_matrices(x, part);
    const double direct = cumulant_kac_density(m, x).value;
    CHECK(f_tilde(dm, sigma).value == doctest::Approx(direct).epsilon(1e-8).scale(1e-12));
  }

  const NodeVector apart({0.0, 3.0});
  const auto part = SetPartition::singletons(2);
  Eigen::MatrixXd sigma = dd_covariance(m, part, apart).sigma;
  for (Eigen::Index i : {0, 2})
    for (Eigen::Index j : {1, 3}) sigma(i, j) = sigma(j, i) = 0.0;
  CHECK(std::abs(f_tilde(doubled_matrices(apart, part), sigma).value) < 1e-12);
}
