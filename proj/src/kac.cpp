#include "kacrice/kac.hpp"

#include <cmath>
#include <numbers>

#include "kacrice/errors.hpp"

namespace kacrice {

DensityValue rho_tilde(const Eigen::MatrixXd& weight, const Eigen::MatrixXd& sigma, const AbsMomentOptions& options) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0) throw ContractError("rho_tilde: sigma must be 2|A| x 2|A|");
  const auto d = sigma.rows() / 2;
  if (weight.rows() != d || weight.cols() != d) throw ContractError("rho_tilde: weight must be |A| x |A|");
  const Eigen::MatrixXd s11 = sigma.topLeftCorner(d, d);
  const Eigen::MatrixXd conditional = schur_complement(sigma, static_cast<int>(d));
  const double det = (2.0 * std::numbers::pi * s11).determinant();
  const double prefactor = 1.0 / std::sqrt(det);
  const auto moment = gaussian_abs_moment(conditional, weight, options);
  return {prefactor * moment.value, prefactor * moment.error, moment.monte_carlo};
}

KacEvaluation rho_with_partition(const CovarianceModel& model, const NodeVector& nodes, const SetPartition& partition,
                                 const KacOptions& options) {
  if (nodes.size() < 1 || nodes.size() > kMaxDoubledSize) throw SizeLimitError("rho: |A| must lie in [1, 5]");
  const BlockCovariance sigma = dd_covariance(model, partition, nodes);
  const Eigen::MatrixXd m = block_interp_matrix(nodes, partition);
  const auto tilde = rho_tilde(m, sigma.sigma, options.moment);
  KacEvaluation out;
  out.partition_used = {partition, options.eta};
  out.det_m = std::abs(m.determinant());
  out.regularized = tilde.value;
  out.value = out.det_m * tilde.value;
  out.error = out.det_m * tilde.error;
  out.det11 = sigma.det11;
  out.monte_carlo = tilde.monte_carlo;
  return out;
}

KacEvaluation rho(const CovarianceModel& model, const NodeVector& nodes, const KacOptions& options) {
  const ClusterPartition clusters = cluster_partition(nodes, options.eta);
  KacEvaluation out = rho_with_partition(model, nodes, clusters.partition, options);
  out.partition_used = clusters;
  return out;
}

CumulantKacEvaluation cumulant_kac_density(const CovarianceModel& model, const NodeVector& nodes,
                                           const KacOptions& options) {
  const int n = nodes.size();
  if (n < 1 || n > kMaxCumulantKacSize) throw SizeLimitError("cumulant_kac_density: |A| must lie in [1, 4]");
  std::vector<KacEvaluation> densities(std::size_t{1} << n);
  for (SubsetMask mask = 1; mask < (SubsetMask{1} << n); ++mask) densities[mask] = rho(model, nodes.subset(mask), options);

  CumulantKacEvaluation out;
  for (const auto& part : enumerate_partitions(n)) {
    double product = 1.0;
    double relative = 0.0;
    for (int k = 0; k < part.size(); ++k) {
      const auto& d = densities[part.block_mask(k)];
      product *= d.value;
      if (d.value != 0.0) relative += d.error / std::abs(d.value);
    }
    const double term = mobius_weight(part.size()) * product;
    out.terms.emplace_back(part, term);
    out.value += term;
    out.error += std::abs(term) * relative;
  }
  return out;
}

DensityValue f_tilde(const DoubledMatrices& matrices, const Eigen::MatrixXd& sigma, const AbsMomentOptions& options) {
  const int n = matrices.ground_size;
  if (n < 1 || n > kMaxCumulantKacSize) throw SizeLimitError("f_tilde: |A| must lie in [1, 4]");
  if (sigma.rows() != 2 * n || sigma.cols() != 2 * n) throw ContractError("f_tilde: sigma must be 2|A| x 2|A|");
  std::vector<DensityValue> factors(std::size_t{1} << n);
  for (SubsetMask mask = 1; mask < (SubsetMask{1} << n); ++mask) {
    const DoubledEntry& entry = matrices.at(mask);
    const Eigen::MatrixXd restricted = entry.q_doubled * sigma * entry.q_doubled.transpose();
    const auto tilde = rho_tilde(entry.m_block, 0.5 * (restricted + restricted.transpose()), options);
    const double det = std::abs(entry.m_block.determinant());
    factors[mask] = {det * tilde.value, det * tilde.error, tilde.monte_carlo};
  }
  DensityValue out;
  for (const auto& part : enumerate_partitions(n)) {
    double product = 1.0;
    double relative = 0.0;
    for (int k = 0; k < part.size(); ++k) {
      const auto& f = factors[part.block_mask(k)];
      product *= f.value;
      if (f.value != 0.0) relative += f.error / std::abs(f.value);
      out.monte_carlo = out.monte_carlo || f.monte_carlo;
    }
    const double term = mobius_weight(part.size()) * product;
    out.value += term;
    out.error += std::abs(term) * relative;
  }
  return out;
}

}  // namespace kacrice
