#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "kacrice/errors.hpp"
#include "kacrice/gaussian.hpp"

using namespace kacrice;

namespace {

// Cov(f[S], f[T]) as iterated divided differences of the kernel.
double dd_kernel(const CovarianceModel& model, const std::vector<double>& s, const std::vector<double>& t) {
  const SmoothFunction in_s{[&](int u, double x) {
                              const SmoothFunction in_t{[&, u, x](int v, double y) { return model.kernel(u, v, x, y); },
                                                        CovarianceModel::kMaxDerivativeOrder};
                              return divided_difference(in_t, t);
                            },
                            CovarianceModel::kMaxDerivativeOrder};
  return divided_difference(in_s, s);
}

Eigen::MatrixXd oracle_sigma(const CovarianceModel& model, const NodeVector& nodes, const SetPartition& partition) {
  const auto seqs = dd_coordinate_sequences(nodes, partition, true);
  const auto n = static_cast<Eigen::Index>(seqs.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = dd_kernel(model, seqs[i], seqs[j]);
  return out;
}

double min_correlation_eigenvalue(const Eigen::MatrixXd& sigma) {
  const Eigen::VectorXd d = sigma.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd c = d.asDiagonal() * sigma * d.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("sinc kernel") {
  const auto m = CovarianceModel::sinc();
  CHECK(m.kernel(0, 0, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(m.kernel(1, 1, 0.0, 0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(m.limit(2, 0.0) == doctest::Approx(-1.0 / 3.0));
  CHECK(m.kernel(0, 0, 2.0, 0.5) == doctest::Approx(std::sin(1.5) / 1.5));
  CHECK(sinc_derivative(1, 1.0) == doctest::Approx(std::cos(1.0) - std::sin(1.0)));
  CHECK_THROWS_AS(m.kernel(13, 0, 0.0, 1.0), CapabilityError);
  CHECK_THROWS_AS(CovarianceModel::sinc(-1.0), ModelError);
  CHECK_THROWS_AS(CovarianceModel::trig_poly(0), ModelError);
  const auto scaled = CovarianceModel::sinc(2.0);
  CHECK(scaled.kernel(0, 0, 1.0, 0.0) == doctest::Approx(std::sin(2.0) / 2.0));
}

TEST_CASE("kernel symmetry") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (const auto& m : {CovarianceModel::sinc(), CovarianceModel::trig_poly(9), CovarianceModel::trig_poly_ar1(9, 0.5)}) {
    for (int trial = 0; trial < 20; ++trial) {
      const double s = u(rng), t = u(rng);
      for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b) CHECK(m.kernel(a, b, s, t) == doctest::Approx(m.kernel(b, a, t, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("trig polynomial kernel") {
  const int n = 7;
  const auto m = CovarianceModel::trig_poly(n);
  for (double tau : {0.0, 0.4, 3.3, 17.0}) {
    double r = 0.0;
    for (int k = 0; k < n; ++k) r += std::cos(k * tau / n);
    CHECK(m.kernel(0, 0, tau, 0.0) == doctest::Approx(r / n).epsilon(1e-13));
  }
  CHECK(m.domain().kind == Domain::Kind::Circle);
  CHECK(m.domain().circumference == doctest::Approx(2.0 * std::numbers::pi * n));
}

TEST_CASE("convergence to the stationary limit") {
  double previous = 1e300;
  for (int n : {20, 40, 80}) {
    const auto m = CovarianceModel::trig_poly(n);
    const auto lim = m.limit_model();
    double worst = 0.0;
    for (double s = -5.0; s <= 5.0; s += 0.5) {
      for (double t = -5.0; t <= 5.0; t += 0.5) {
        for (int u = 0; u <= 1; ++u)
          for (int v = 0; v <= 1; ++v) {
            const double expected = (v % 2 ? -1.0 : 1.0) * lim.limit(u + v, s - t);
            worst = std::max(worst, std::abs(m.kernel(u, v, s, t) - expected));
          }
      }
    }
    CHECK(worst < previous);
    previous = worst;
  }
  CHECK(previous < 0.05);
}

TEST_CASE("divided-difference covariance") {
  const auto m = CovarianceModel::sinc();
  const auto one = dd_covariance(m, SetPartition::singletons(1), NodeVector({0.3}));
  CHECK(one.sigma(0, 0) == doctest::Approx(1.0));
  CHECK(one.sigma(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(one.sigma(0, 1)) < 1e-14);

  const NodeVector nodes({0.0, 0.6, 1.2, 4.0});
  const SetPartition part({{0, 1, 2}, {3}}, 4);
  const auto spectral = dd_covariance(m, part, nodes);
  CHECK((spectral.sigma - oracle_sigma(m, nodes, part)).cwiseAbs().maxCoeff() < 1e-8);

  const NodeVector small({0.0, 0.15, 1.2});
  const SetPartition pair({{0, 1}, {2}}, 3);
  const auto oracle = oracle_sigma(m, small, pair);
  CHECK((dd_covariance(m, pair, small).sigma - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((dd_covariance(m, pair, small, CovarianceMethod::Simplex).sigma - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((spectral.sigma - spectral.sigma.transpose()).norm() == 0.0);

  const auto trig = CovarianceModel::trig_poly(30);
  const NodeVector wrapped({0.05, 2.0 * std::numbers::pi * 30 - 0.05}, trig.domain());
  const auto w = dd_covariance(trig, SetPartition::single_block(2), wrapped);
  CHECK(w.sigma.allFinite());
  CHECK(w.det11 > 0.0);
}

TEST_CASE("confluent limit is continuous") {
  const auto m = CovarianceModel::sinc();
  const auto block = SetPartition::single_block(2);
  const auto same = dd_covariance(m, block, NodeVector({0.0, 0.0}));
  const auto gap = [&](double h) {
    return (dd_covariance(m, block, NodeVector({0.0, h})).sigma - same.sigma).cwiseAbs().maxCoeff();
  };
  CHECK(gap(1e-6) < 1e-6);
  CHECK(gap(1e-4) / gap(1e-5) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("separated cells decorrelate") {
  const auto m = CovarianceModel::sinc();
  for (double d : {10.0, 40.0, 160.0}) {
    const auto s = dd_covariance(m, SetPartition::singletons(2), NodeVector({0.0, d}));
    const Eigen::Index rows[] = {0, 2}, cols[] = {1, 3};
    for (auto i : rows)
      for (auto j : cols) CHECK(std::abs(s.sigma(i, j)) <= m.envelope(d));
  }
}

TEST_CASE("positivity of the divided-difference covariance") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (const auto& m : {CovarianceModel::sinc(), CovarianceModel::trig_poly(50)}) {
    for (int size = 1; size <= 4; ++size) {
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(size));
        for (auto& v : x) v = u(rng);
        const NodeVector nodes(x, m.domain());
        const auto part = cluster_partition(nodes, 0.25).partition;
        const double floor = size <= 3 ? 0.0 : -1e-13;
        CHECK(min_correlation_eigenvalue(dd_covariance(m, part, nodes).sigma) > floor);
      }
    }
  }
}

TEST_CASE("transfer consistency") {
  const auto m = CovarianceModel::sinc();
  const NodeVector nodes({0.0, 0.1, 1.5, 1.6});
  const SetPartition part({{0, 1}, {2, 3}}, 4);
  const auto full = dd_covariance(m, part, nodes);
  const auto dm = doubled_matrices(nodes, part);
  for (SubsetMask b = 1; b < 16; ++b) {
    const auto& e = dm.at(b);
    const auto sub = dd_covariance(m, e.induced_partition, nodes.subset(b));
    const Eigen::MatrixXd pushed = e.q_doubled * full.sigma * e.q_doubled.transpose();
    CHECK((sub.sigma - pushed).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Schur complement") {
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(4, 4);
  block.topLeftCorner(2, 2) << 2.0, 0.3, 0.3, 1.0;
  block.bottomRightCorner(2, 2) << 1.5, -0.2, -0.2, 0.7;
  CHECK((schur_complement(block, 2) - block.bottomRightCorner(2, 2)).norm() == 0.0);

  Eigen::MatrixXd pair(2, 2);
  pair << 1.0, 0.6, 0.6, 1.0;
  CHECK(schur_complement(pair, 1)(0, 0) == doctest::Approx(1.0 - 0.36));

  const auto s = dd_covariance(CovarianceModel::sinc(), SetPartition::singletons(2), NodeVector({0.0, 1.2}));
  const Eigen::MatrixXd c = schur_complement(s);
  CHECK(s.sigma.determinant() == doctest::Approx(s.det11 * c.determinant()).epsilon(1e-10));
  const Eigen::MatrixXd inv = s.sigma.inverse().bottomRightCorner(2, 2);
  CHECK((inv - c.inverse()).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd degenerate(2, 2);
  degenerate << 1.0, 1.0, 1.0, 1.0;
  Eigen::MatrixXd padded = Eigen::MatrixXd::Identity(4, 4);
  padded.topLeftCorner(2, 2) = degenerate;
  CHECK_THROWS_AS(schur_complement(padded, 2), ConditioningError);
}

TEST_CASE("Gaussian absolute moments") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  CHECK(gaussian_abs_moment(one, one).value == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-9));
  const Eigen::MatrixXd two = Eigen::MatrixXd::Identity(2, 2);
  CHECK(gaussian_abs_moment(two, two).value == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-9));
  Eigen::MatrixXd repeat(2, 2);
  repeat << 1.0, 0.0, 1.0, 0.0;
  CHECK(gaussian_abs_moment(two, repeat).value == doctest::Approx(1.0).epsilon(1e-9));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  AbsMomentOptions mc;
  mc.method = AbsMomentOptions::Method::MonteCarlo;
  mc.mc_samples = 400000;
  for (int trial = 0; trial < 5; ++trial) {
    const double r = u(rng);
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, r, r, 1.0;
    const double exact = 2.0 / std::numbers::pi * (std::sqrt(1.0 - r * r) + r * std::asin(r));
    CHECK(gaussian_abs_moment(cov, two).value == doctest::Approx(exact).epsilon(1e-8));
    mc.seed = static_cast<std::uint64_t>(trial + 1);
    const auto est = gaussian_abs_moment(cov, two, mc);
    CHECK(est.monte_carlo);
    CHECK(std::abs(est.value - exact) < 4.0 * est.error);
  }

  Eigen::MatrixXd cov3(3, 3);
  cov3 << 1.0, 0.4, -0.2, 0.4, 1.0, 0.3, -0.2, 0.3, 1.0;
  const Eigen::MatrixXd id3 = Eigen::MatrixXd::Identity(3, 3);
  const auto quad3 = gaussian_abs_moment(cov3, id3);
  mc.seed = 99;
  const auto mc3 = gaussian_abs_moment(cov3, id3, mc);
  CHECK(std::abs(quad3.value - mc3.value) < 4.0 * mc3.error);
}
