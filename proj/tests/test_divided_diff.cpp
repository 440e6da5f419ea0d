#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "kacrice/divided_diff.hpp"
#include "kacrice/errors.hpp"

using namespace kacrice;

namespace {

SmoothFunction monomial(int degree) {
  return {[degree](int order, double x) {
            if (order > degree) return 0.0;
            double c = 1.0;
            for (int i = 0; i < order; ++i) c *= degree - i;
            return c * std::pow(x, degree - order);
          },
          20};
}

SmoothFunction exp_function() {
  return {[](int, double x) { return std::exp(x); }, 20};
}

SmoothFunction sin_function() {
  return {[](int order, double x) { return std::sin(x + order * M_PI / 2); }, 20};
}

// Recursive definition with distinct nodes.
double dd_oracle(const std::function<double(double)>& f, std::vector<double> x) {
  if (x.size() == 1) return f(x[0]);
  std::vector<double> head(x.begin(), x.end() - 1), tail(x.begin() + 1, x.end());
  return (dd_oracle(f, tail) - dd_oracle(f, head)) / (x.back() - x.front());
}

}  // namespace

TEST_CASE("divided differences of polynomials") {
  const std::vector<double> two{1.0, 2.0};
  CHECK(divided_difference(monomial(4), two) == doctest::Approx(15.0).epsilon(1e-14));
  const std::vector<double> same{1.5, 1.5};
  CHECK(divided_difference(monomial(3), same) == doctest::Approx(3 * 1.5 * 1.5).epsilon(1e-14));
  const std::vector<double> near{0.0, 1e-8};
  CHECK(divided_difference(exp_function(), near) == doctest::Approx(1.0).epsilon(1e-6));
  // Degree-d polynomial: order-d difference is the leading coefficient, higher orders vanish.
  const std::vector<double> five{-1.0, 0.3, 0.3, 2.0, 2.5};
  CHECK(divided_difference(monomial(4), five) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(divided_difference(monomial(3), five)) < 1e-12);
}

TEST_CASE("divided differences: symmetry and recursion") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto f = sin_function();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = u(rng);
    const double base = divided_difference(f, x);
    CHECK(base == doctest::Approx(dd_oracle([](double t) { return std::sin(t); }, x)).epsilon(1e-8));
    std::shuffle(x.begin(), x.end(), rng);
    CHECK(divided_difference(f, x) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("Hermite-Genocchi representation") {
  const std::vector<double> one{0.7};
  CHECK(hermite_genocchi(sin_function(), one).value == doctest::Approx(std::sin(0.7)));
  const std::vector<double> pair{0.0, std::log(2.0)};
  CHECK(hermite_genocchi(exp_function(), pair).value == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-8));
  const std::vector<double> three{0.0, 0.5, 1.0};
  const double s0 = std::sin(0.0), s1 = std::sin(0.5), s2 = std::sin(1.0);
  const double explicit_value = ((s2 - s1) / 0.5 - (s1 - s0) / 0.5) / 1.0;
  CHECK(hermite_genocchi(sin_function(), three).value == doctest::Approx(explicit_value).epsilon(1e-8));
  const std::vector<double> confluent{0.2, 0.2, 1.1, -0.4};
  CHECK(hermite_genocchi(exp_function(), confluent).value ==
        doctest::Approx(divided_difference(exp_function(), confluent)).epsilon(1e-8));
}

TEST_CASE("Newton interpolation matrices") {
  const std::vector<double> x{1.0, 2.0, 4.0};
  const auto m = interp_matrix(x);
  CHECK(m.determinant() == doctest::Approx(6.0));
  for (int a = 0; a < 3; ++a) {
    CHECK(m(a, 0) == 1.0);
    CHECK(m(a, 1) == doctest::Approx(x[a] - 1.0));
    CHECK(m(a, 2) == doctest::Approx((x[a] - 1.0) * (x[a] - 2.0)));
  }
  // det M is the Vandermonde product.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> y(5);
    for (auto& v : y) v = u(rng);
    double vandermonde = 1.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < i; ++j) vandermonde *= y[i] - y[j];
    CHECK(interp_matrix(y).determinant() == doctest::Approx(vandermonde).epsilon(1e-12));
  }
  const std::vector<double> repeated{1.0, 1.0, 3.0};
  CHECK(interp_matrix(repeated).determinant() == 0.0);

  // f(x_A) = M f_I[x_A]
  const NodeVector nodes({0.1, 0.4, 2.0, 2.3, 5.0});
  const SetPartition part({{0, 1}, {2, 3}, {4}}, 5);
  const auto mi = block_interp_matrix(nodes, part);
  const auto seqs = dd_coordinate_sequences(nodes, part, false);
  Eigen::VectorXd coords(5), values(5);
  for (int a = 0; a < 5; ++a) {
    coords(a) = divided_difference(sin_function(), seqs[a]);
    values(a) = std::sin(nodes[a]);
  }
  CHECK((mi * coords - values).norm() < 1e-12);
  CHECK((block_interp_matrix(nodes, SetPartition::singletons(5)) - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
  CHECK((block_interp_matrix(nodes, SetPartition::single_block(5)) - interp_matrix(nodes.values())).norm() < 1e-14);
}

TEST_CASE("transfer matrices") {
  const NodeVector nodes({1.0, 2.0, 4.0});
  const auto single = SetPartition::single_block(3);
  const SetPartition mixed({{0, 1}, {2}}, 3);
  const auto q = transfer_matrix(nodes, single, mixed);
  CHECK((q.row(2) - interp_matrix(nodes.values()).row(2)).norm() < 1e-14);
  CHECK((transfer_matrix(nodes, mixed, mixed) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK(std::abs(transfer_matrix(nodes, single, SetPartition::singletons(3)).determinant()) ==
        doctest::Approx(6.0));
  CHECK_THROWS_AS(transfer_matrix(nodes, mixed, single), ContractError);

  // Chain rule Q^{I,K} = Q^{J,K} Q^{I,J} for I >= J >= K.
  const NodeVector five({0.0, 0.3, 0.5, 1.4, 1.9});
  const auto coarse = SetPartition::single_block(5);
  const SetPartition middle({{0, 1, 2}, {3, 4}}, 5);
  const SetPartition fine({{0, 1}, {2}, {3}, {4}}, 5);
  const auto direct = transfer_matrix(five, coarse, fine);
  const Eigen::MatrixXd chained = transfer_matrix(five, middle, fine) * transfer_matrix(five, coarse, middle);
  CHECK((direct - chained).norm() < 1e-10 * direct.norm());

  // Defining identity on coordinates.
  const auto seq_c = dd_coordinate_sequences(five, coarse, false);
  const auto seq_f = dd_coordinate_sequences(five, fine, false);
  Eigen::VectorXd fc(5), ff(5);
  for (int a = 0; a < 5; ++a) {
    fc(a) = divided_difference(exp_function(), seq_c[a]);
    ff(a) = divided_difference(exp_function(), seq_f[a]);
  }
  CHECK((direct * fc - ff).norm() < 1e-10);
}

TEST_CASE("cluster partitions") {
  CHECK(cluster_partition(NodeVector({0.0, 0.1, 5.0}), 0.25).partition == SetPartition({{0, 1}, {2}}, 3));
  CHECK(cluster_partition(NodeVector({0.0, 0.2, 0.4}), 0.25).partition == SetPartition::single_block(3));
  CHECK(cluster_partition(NodeVector({3.0}), 0.25).partition == SetPartition::singletons(1));
  CHECK(cluster_partition(NodeVector({0.1, 9.9}, Domain::circle(10.0)), 0.25).partition ==
        SetPartition::single_block(2));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = u(rng);
    const NodeVector nodes(x);
    const auto c = cluster_partition(nodes, 0.3).partition;
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        if (std::abs(x[a] - x[b]) <= 0.3) CHECK(c.block_of(a) == c.block_of(b));
      }
    }
    // Different blocks are separated by more than eta.
    for (int k = 0; k < c.size(); ++k) {
      for (int l = k + 1; l < c.size(); ++l) {
        for (int a : c.blocks()[k])
          for (int b : c.blocks()[l]) CHECK(std::abs(x[a] - x[b]) > 0.3);
      }
    }
  }
}

TEST_CASE("doubled matrices") {
  const NodeVector nodes({0.0, 0.15, 3.0});
  const SetPartition part({{0, 1}, {2}}, 3);
  const auto dm = doubled_matrices(nodes, part);
  const SubsetMask all = 0b111;
  CHECK((dm.at(all).q_doubled - Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);
  CHECK((dm.at(all).m_block - block_interp_matrix(nodes, part)).norm() < 1e-14);

  // f_{I_B}[x_{B,B}] = Q^{I,2B} f_I[x_{A,A}] for every B.
  const auto f = sin_function();
  const auto seq_a = dd_coordinate_sequences(nodes, part, true);
  Eigen::VectorXd fa(6);
  for (int i = 0; i < 6; ++i) fa(i) = divided_difference(f, seq_a[i]);
  for (SubsetMask b = 1; b < all; ++b) {
    const auto& e = dm.at(b);
    const auto seq_b = dd_coordinate_sequences(nodes.subset(b), e.induced_partition, true);
    Eigen::VectorXd fb(static_cast<Eigen::Index>(seq_b.size()));
    for (std::size_t i = 0; i < seq_b.size(); ++i) fb(static_cast<Eigen::Index>(i)) = divided_difference(f, seq_b[i]);
    CHECK((e.q_doubled * fa - fb).norm() < 1e-10);
  }

  const auto lone = doubled_matrices(NodeVector({1.0}), SetPartition::singletons(1));
  CHECK(lone.at(1).m_block(0, 0) == 1.0);
  CHECK((lone.at(1).q_doubled - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("circle domain") {
  const auto c = Domain::circle(10.0);
  CHECK(c.distance(0.5, 9.5) == doctest::Approx(1.0));
  CHECK(c.distance(2.0, 7.0) == doctest::Approx(5.0));
  CHECK(c.reduce(-1.0) == doctest::Approx(9.0));
  CHECK(c.unwrap_near(0.5, 9.5) == doctest::Approx(-0.5));
  CHECK(Domain::line().distance(-1.0, 2.0) == 3.0);
  const std::vector<double> y{1.0, 2.0};
  const auto h = complete_homogeneous(y, 3);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == 3.0);
  CHECK(h[2] == 7.0);
  CHECK(h[3] == 15.0);
}
