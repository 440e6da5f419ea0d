#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kacrice/errors.hpp"
#include "kacrice/partitions.hpp"

using namespace kacrice;

namespace {

// Bell numbers by the recurrence B_{n+1} = sum_k C(n,k) B_k.
std::vector<std::uint64_t> bell_oracle(int max) {
  std::vector<std::uint64_t> b{1};
  for (int n = 0; n < max; ++n) {
    std::uint64_t next = 0;
    std::uint64_t c = 1;
    for (int k = 0; k <= n; ++k) {
      next += c * b[static_cast<std::size_t>(k)];
      c = c * static_cast<std::uint64_t>(n - k) / static_cast<std::uint64_t>(k + 1);
    }
    b.push_back(next);
  }
  return b;
}

}  // namespace

TEST_CASE("enumeration counts match Bell numbers") {
  CHECK(enumerate_partitions(1).size() == 1);
  CHECK(enumerate_partitions(3).size() == 5);
  CHECK(enumerate_partitions(5).size() == 52);
  const auto bell = bell_oracle(10);
  for (int p = 1; p <= 8; ++p) {
    const auto parts = enumerate_partitions(p);
    CHECK(parts.size() == bell[static_cast<std::size_t>(p)]);
    CHECK(bell_number(p) == bell[static_cast<std::size_t>(p)]);
    std::set<SetPartition> unique(parts.begin(), parts.end());
    CHECK(unique.size() == parts.size());
    std::uint64_t sum = 0;
    for (int k = 1; k <= p; ++k) sum += stirling2(p, k);
    CHECK(sum == bell[static_cast<std::size_t>(p)]);
  }
  CHECK_THROWS_AS(enumerate_partitions(11), SizeLimitError);
  CHECK_THROWS_AS(enumerate_partitions(0), ContractError);
}

TEST_CASE("canonical form") {
  const SetPartition p({{3, 1}, {0, 2}}, 4);
  CHECK(p.to_string() == "{{0,2},{1,3}}");
  CHECK(p.block_of(3) == 1);
  CHECK(p.block_mask(0) == 0b0101u);
  CHECK_THROWS_AS(SetPartition({{0, 1}, {1, 2}}, 3), ContractError);
  CHECK_THROWS_AS(SetPartition({{0}, {2}}, 3), ContractError);
  CHECK_THROWS_AS(SetPartition({{0, 1}, {}}, 2), ContractError);
  for (const auto& q : enumerate_partitions(5)) {
    for (std::size_t k = 1; k < q.blocks().size(); ++k) CHECK(q.blocks()[k - 1].front() < q.blocks()[k].front());
  }
}

TEST_CASE("refinement order") {
  const SetPartition a({{0, 1}, {2}}, 3);
  const SetPartition b({{0}, {1, 2}}, 3);
  CHECK(refines(SetPartition::singletons(3), a));
  CHECK(refines(a, SetPartition::single_block(3)));
  CHECK_FALSE(refines(a, b));
  CHECK(refines(a, a));
  CHECK_THROWS_AS(refines(a, SetPartition::singletons(4)), ContractError);

  const auto all = enumerate_partitions(4);
  for (const auto& x : all) {
    CHECK(refines(x, x));
    for (const auto& y : all) {
      if (refines(x, y) && refines(y, x)) CHECK(x == y);
      for (const auto& z : all) {
        if (refines(x, y) && refines(y, z)) CHECK(refines(x, z));
      }
    }
  }
}

TEST_CASE("induced partitions") {
  // {{1,2},{3,4},{5}} restricted to {1,2,3}.
  const SetPartition i({{0}, {1, 2}, {3, 4}, {5}}, 6);
  const std::vector<int> b{1, 2, 3};
  CHECK(induced(i, b) == SetPartition({{0, 1}, {2}}, 3));
  std::vector<int> all{0, 1, 2, 3, 4, 5};
  CHECK(induced(i, all) == i);
  const std::vector<int> one{4};
  CHECK(induced(i, one) == SetPartition::singletons(1));
  CHECK(induced(i, SubsetMask{0b001110}) == SetPartition({{0, 1}, {2}}, 3));
  CHECK_THROWS_AS(induced(i, std::vector<int>{}), ContractError);
}

TEST_CASE("cumulants from moments") {
  const double c = 1.7;
  const std::vector<double> constant{c, c * c, c * c * c, c * c * c * c};
  const auto kc = cumulants_from_moments(constant);
  CHECK(kc[0] == doctest::Approx(c));
  for (std::size_t k = 1; k < kc.size(); ++k) CHECK(std::abs(kc[k]) < 1e-12);

  const auto kg = cumulants_from_moments(std::vector<double>{0, 1, 0, 3, 0, 15});
  const std::vector<double> gauss{0, 1, 0, 0, 0, 0};
  for (std::size_t k = 0; k < 6; ++k) CHECK(kg[k] == doctest::Approx(gauss[k]).epsilon(1e-12));

  // Poisson moments by m_{k+1} = lambda sum_j C(k,j) m_j, m_0 = 1.
  const double lambda = 2.0;
  std::vector<double> m{1.0};
  for (int k = 0; k < 6; ++k) {
    double s = 0.0, binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      s += binom * m[static_cast<std::size_t>(j)];
      binom = binom * (k - j) / (j + 1);
    }
    m.push_back(lambda * s);
  }
  CHECK(m[1] == 2);
  CHECK(m[2] == 6);
  CHECK(m[3] == 22);
  CHECK(m[4] == 94);
  const auto kp = cumulants_from_moments(std::vector<double>(m.begin() + 1, m.end()));
  for (double k : kp) CHECK(k == doctest::Approx(lambda).epsilon(1e-12));
}

TEST_CASE("moments from cumulants and round trip") {
  const auto m = moments_from_cumulants(std::vector<double>{0, 1, 0, 0});
  CHECK(m[1] == doctest::Approx(1.0));
  CHECK(m[3] == doctest::Approx(3.0));
  const auto mc = moments_from_cumulants(std::vector<double>{2.0, 0, 0});
  CHECK(mc[2] == doctest::Approx(8.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int p = 1; p <= 8; ++p) {
    std::vector<double> k(static_cast<std::size_t>(p));
    for (auto& v : k) v = u(rng);
    const auto m = moments_from_cumulants(k);
    double scale = 1.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    const auto back = cumulants_from_moments(m);
    for (int i = 0; i < p; ++i)
      CHECK(std::abs(back[static_cast<std::size_t>(i)] - k[static_cast<std::size_t>(i)]) < 1e-12 * scale);
  }
}

TEST_CASE("joint cumulants") {
  CHECK(joint_cumulant(1, {{1u, 0.7}}) == doctest::Approx(0.7));
  CHECK(joint_cumulant(2, {{1u, 0.5}, {2u, 2.0}, {3u, 1.4}}) == doctest::Approx(1.4 - 1.0));
  CHECK_THROWS_AS(joint_cumulant(2, {{1u, 0.5}, {3u, 1.0}}), ContractError);

  // Moments factorizing over a two-cell partition have vanishing joint cumulant.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<int> labels(static_cast<std::size_t>(n));
      for (auto& l : labels) l = static_cast<int>(rng() % 2);
      labels[0] = 0;
      labels[1] = 1;
      const SetPartition cells = SetPartition::from_labels(labels);
      const SubsetMask first = cells.block_mask(0);
      std::map<SubsetMask, double> part;
      part[0] = 1.0;
      std::map<SubsetMask, double> moments;
      for (SubsetMask s = 1; s < (SubsetMask{1} << n); ++s) {
        for (SubsetMask piece : {s & first, s & ~first}) {
          if (!part.count(piece)) part[piece] = normal(rng);
        }
        moments[s] = part[s & first] * part[s & ~first];
      }
      CHECK(std::abs(joint_cumulant(n, moments)) < 1e-12);
    }
  }
}

TEST_CASE("Stirling numbers of the second kind") {
  CHECK(stirling2(3, 2) == 3);
  CHECK(stirling2(5, 3) == 25);
  for (int p = 1; p <= 12; ++p) {
    CHECK(stirling2(p, 1) == 1);
    CHECK(stirling2(p, p) == 1);
  }
  for (int k = 1; k <= 5; ++k) {
    std::uint64_t count = 0;
    for (const auto& q : enumerate_partitions(5)) count += q.size() == k ? 1 : 0;
    CHECK(stirling2(5, k) == count);
  }
  CHECK(mobius_weight(3) == doctest::Approx(2.0));
  CHECK(mobius_weight(4) == doctest::Approx(-6.0));
}
