#pragma once

// Matrix-form Kac density rho~(M, Sigma), the p-point Kac density rho(x_A)
// through cluster partitions, and the cumulant Kac density F_A.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "kacrice/divided_diff.hpp"
#include "kacrice/gaussian.hpp"
#include "kacrice/partitions.hpp"

namespace kacrice {

struct DensityValue {
  double value = 0.0;
  double error = 0.0;
  bool monte_carlo = false;
};

// (det 2 pi Sigma^{11})^{-1/2} E prod_a |(M Y)_a|, Y ~ N(0, Sigma^c), for Sigma on
// the doubled index set 2A.
DensityValue rho_tilde(const Eigen::MatrixXd& weight, const Eigen::MatrixXd& sigma,
                       const AbsMomentOptions& options = {});

struct KacOptions {
  double eta = 0.25;
  AbsMomentOptions moment;
};

struct KacEvaluation {
  double value = 0.0;  // rho(x_A)
  double error = 0.0;
  ClusterPartition partition_used;
  double det_m = 0.0;        // |det M^I(x_A)|
  double regularized = 0.0;  // rho~(M^I, Sigma^I), finite on the diagonal of each cell
  double det11 = 0.0;
  bool monte_carlo = false;
};

// rho(x_A) = |det M^I| rho~(M^I(x_A), Sigma^I(x_{A,A})) with I the eta-cluster partition.
KacEvaluation rho(const CovarianceModel& model, const NodeVector& nodes, const KacOptions& options = {});

// Same formula with a caller-chosen partition (any I with x_A in Delta_{I+}).
KacEvaluation rho_with_partition(const CovarianceModel& model, const NodeVector& nodes, const SetPartition& partition,
                                 const KacOptions& options = {});

struct CumulantKacEvaluation {
  double value = 0.0;
  double error = 0.0;
  std::vector<std::pair<SetPartition, double>> terms;
};

inline constexpr int kMaxCumulantKacSize = 4;

// F_A(x_A) = sum_J (|J|-1)! (-1)^{|J|-1} prod_{J in J} rho(x_J).
CumulantKacEvaluation cumulant_kac_density(const CovarianceModel& model, const NodeVector& nodes,
                                           const KacOptions& options = {});

// F~_A((M~, Q~), Sigma) = sum_J (|J|-1)! (-1)^{|J|-1} prod_J |det M^J| rho~(M^J, Q^J Sigma Q^J^T).
DensityValue f_tilde(const DoubledMatrices& matrices, const Eigen::MatrixXd& sigma,
                     const AbsMomentOptions& options = {});

}  // namespace kacrice
