#pragma once

// Divided differences with confluent limits, the Newton interpolation matrices
// M(x_A), M^I(x_A), the transfer matrices Q^{I,J}(x_A), Q^{I,2B}(x_{A,A}), and the
// eta-cluster partition of a node vector.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "kacrice/partitions.hpp"

namespace kacrice {

struct Domain {
  enum class Kind { Line, Circle };
  Kind kind = Kind::Line;
  double circumference = 0.0;  // only for circles

  static Domain line() { return {}; }
  static Domain circle(double circumference);

  // Line: |a - b|; circle: min(|d|, C - |d|) with d reduced mod C.
  double distance(double a, double b) const;
  // Representative of b closest to a (identity on the line).
  double unwrap_near(double a, double b) const;
  double reduce(double x) const;
};

class NodeVector {
 public:
  NodeVector() = default;
  explicit NodeVector(std::vector<double> nodes, Domain domain = Domain::line());

  const std::vector<double>& values() const noexcept { return nodes_; }
  const Domain& domain() const noexcept { return domain_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  double operator[](int a) const { return nodes_[static_cast<std::size_t>(a)]; }

  // Nodes restricted to a subset, in increasing index order.
  NodeVector subset(SubsetMask mask) const;

  // On a circle, shifts every node of each block by a multiple of the circumference
  // so that the block is contiguous on the real line; identity on the line.
  NodeVector unwrapped(const SetPartition& partition) const;

 private:
  std::vector<double> nodes_;
  Domain domain_;
};

// Real function with derivatives available up to `max_order`.
struct SmoothFunction {
  std::function<double(int order, double x)> eval;
  int max_order = 0;

  double operator()(int order, double x) const;
};

inline constexpr double kConfluenceThreshold = 1e-7;

// f[x_A]; nodes closer than kConfluenceThreshold * max(1, max|x|) are merged and
// handled through derivatives f^(k)(y)/k!.
double divided_difference(const SmoothFunction& f, std::span<const double> nodes);

struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;
};

// Simplex integral of f^{(|A|-1)} over the convex hull parametrization
// (Hermite-Genocchi); throws ToleranceError if two successive orders disagree by more than tol.
QuadratureValue hermite_genocchi(const SmoothFunction& f, std::span<const double> nodes, double tol = 1e-10,
                                 int order = 16);

// M(x_A): M_{a,b} = prod_{c<b} (x_a - x_c).
Eigen::MatrixXd interp_matrix(std::span<const double> nodes);

// M^I(x_A): block-diagonal assembly of interp_matrix over the blocks of `partition`,
// indexed by A.
Eigen::MatrixXd block_interp_matrix(const NodeVector& nodes, const SetPartition& partition);

// Q^{I,J}(x_A) with `fine` refining `coarse`: f_fine[x_A] = Q f_coarse[x_A].
Eigen::MatrixXd transfer_matrix(const NodeVector& nodes, const SetPartition& coarse, const SetPartition& fine);

struct ClusterPartition {
  SetPartition partition;
  double eta = 0.0;
};

// Connected components of the graph linking nodes at distance <= eta.
ClusterPartition cluster_partition(const NodeVector& nodes, double eta);

// Node sequences of the divided-difference coordinates f_I[x_A] (doubled = false,
// |A| sequences) or f_I[x_{A,A}] (doubled = true, 2|A| sequences in the order
// (1,a) for a in A, then (2,a) for a in A).
std::vector<std::vector<double>> dd_coordinate_sequences(const NodeVector& nodes, const SetPartition& partition,
                                                         bool doubled);

// Row vector (N_k[targets])_k of divided differences of the Newton basis
// N_k(x) = prod_{i<k}(x - sequence_i) over `target`, which must be a sub-multiset of `sequence`.
Eigen::RowVectorXd newton_basis_divided_differences(std::span<const double> sequence,
                                                    std::span<const double> target);

struct DoubledEntry {
  SubsetMask subset = 0;
  SetPartition induced_partition;  // partition of B induced by I, over 0..|B|-1
  Eigen::MatrixXd m_block;         // M^{I_B}(x_B), |B| x |B|
  Eigen::MatrixXd q_doubled;       // Q^{I,2B}(x_{A,A}), 2|B| x 2|A|
};

struct DoubledMatrices {
  int ground_size = 0;
  SetPartition partition;
  std::vector<DoubledEntry> entries;  // indexed by subset mask; entry 0 unused

  const DoubledEntry& at(SubsetMask subset) const { return entries.at(subset); }
};

inline constexpr int kMaxDoubledSize = 5;

DoubledMatrices doubled_matrices(const NodeVector& nodes, const SetPartition& partition);

// Complete homogeneous symmetric polynomials h_0..h_max_degree of `y`.
std::vector<double> complete_homogeneous(std::span<const double> y, int max_degree);

}  // namespace kacrice
