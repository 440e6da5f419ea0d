#include "kacrice/divided_diff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kacrice/errors.hpp"
#include "kacrice/quadrature.hpp"

namespace kacrice {

Domain Domain::circle(double circumference) {
  if (!(circumference > 0.0) || !std::isfinite(circumference)) {
    throw ContractError("Domain::circle: circumference must be positive and finite");
  }
  return {Kind::Circle, circumference};
}

double Domain::reduce(double x) const {
  if (kind == Kind::Line) return x;
  double r = std::fmod(x, circumference);
  if (r < 0.0) r += circumference;
  return r;
}

double Domain::distance(double a, double b) const {
  const double d = std::abs(a - b);
  if (kind == Kind::Line) return d;
  const double r = std::fmod(d, circumference);
  return std::min(r, circumference - r);
}

double Domain::unwrap_near(double a, double b) const {
  if (kind == Kind::Line) return b;
  const double shift = std::round((b - a) / circumference);
  return b - shift * circumference;
}

NodeVector::NodeVector(std::vector<double> nodes, Domain domain) : nodes_(std::move(nodes)), domain_(domain) {
  for (double& x : nodes_) {
    if (!std::isfinite(x)) throw ContractError("NodeVector: non-finite node");
    x = domain_.reduce(x);
  }
}

NodeVector NodeVector::subset(SubsetMask mask) const {
  std::vector<double> out;
  for (int a : mask_elements(mask)) {
    if (a >= size()) throw ContractError("NodeVector::subset: mask exceeds node count");
    out.push_back(nodes_[static_cast<std::size_t>(a)]);
  }
  NodeVector result;
  result.nodes_ = std::move(out);
  result.domain_ = domain_;
  return result;
}

NodeVector NodeVector::unwrapped(const SetPartition& partition) const {
  if (partition.ground_size() != size()) throw ContractError("NodeVector::unwrapped: partition size mismatch");
  NodeVector result = *this;
  if (domain_.kind == Domain::Kind::Line) return result;
  for (const auto& block : partition.blocks()) {
    const double anchor = nodes_[static_cast<std::size_t>(block.front())];
    for (int a : block) {
      result.nodes_[static_cast<std::size_t>(a)] = domain_.unwrap_near(anchor, nodes_[static_cast<std::size_t>(a)]);
    }
  }
  return result;
}

double SmoothFunction::operator()(int order, double x) const {
  if (order > max_order) {
    throw CapabilityError("SmoothFunction: derivative of order " + std::to_string(order) + " is not available");
  }
  return eval(order, x);
}

double divided_difference(const SmoothFunction& f, std::span<const double> nodes) {
  if (nodes.empty()) throw ContractError("divided_difference: empty node set");
  std::vector<double> z(nodes.begin(), nodes.end());
  std::sort(z.begin(), z.end());
  double scale = 1.0;
  for (double x : z) scale = std::max(scale, std::abs(x));
  const double threshold = kConfluenceThreshold * scale;
  // Snap each run of near-coincident nodes onto its mean.
  for (std::size_t i = 0; i < z.size();) {
    std::size_t j = i + 1;
    while (j < z.size() && z[j] - z[j - 1] <= threshold) ++j;
    const double mean = std::accumulate(z.begin() + static_cast<long>(i), z.begin() + static_cast<long>(j), 0.0) /
                        static_cast<double>(j - i);
    std::fill(z.begin() + static_cast<long>(i), z.begin() + static_cast<long>(j), mean);
    i = j;
  }
  const std::size_t n = z.size();
  std::vector<double> column(n);
  for (std::size_t i = 0; i < n; ++i) column[i] = f(0, z[i]);
  double factorial = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    factorial *= static_cast<double>(j);
    // column[i] holds f[z_{i-j+1},...,z_i]; update in place from the bottom.
    for (std::size_t i = n - 1; i >= j; --i) {
      if (z[i] == z[i - j]) {
        column[i] = f(static_cast<int>(j), z[i]) / factorial;
      } else {
        column[i] = (column[i] - column[i - 1]) / (z[i] - z[i - j]);
      }
    }
  }
  return column[n - 1];
}

QuadratureValue hermite_genocchi(const SmoothFunction& f, std::span<const double> nodes, double tol, int order) {
  if (nodes.empty()) throw ContractError("hermite_genocchi: empty node set");
  const int dim = static_cast<int>(nodes.size()) - 1;
  if (dim == 0) return {f(0, nodes[0]), 0.0};
  const auto apply = [&](int q) {
    const auto rule = quad::simplex_rule(dim, q);
    double sum = 0.0;
    for (std::size_t p = 0; p < rule.weights.size(); ++p) {
      double point = 0.0;
      for (int a = 0; a <= dim; ++a) point += rule.barycentric[p][static_cast<std::size_t>(a)] * nodes[static_cast<std::size_t>(a)];
      sum += rule.weights[p] * f(dim, point);
    }
    return sum;
  };
  const double coarse = apply(order);
  const double fine = apply(order + 8);
  const double error = std::abs(fine - coarse);
  if (error > tol) throw ToleranceError("hermite_genocchi: simplex quadrature did not converge", fine, error);
  return {fine, error};
}

Eigen::MatrixXd interp_matrix(std::span<const double> nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double product = 1.0;
    for (Eigen::Index b = 0; b <= a; ++b) {
      m(a, b) = product;
      product *= nodes[static_cast<std::size_t>(a)] - nodes[static_cast<std::size_t>(b)];
    }
  }
  return m;
}

Eigen::MatrixXd block_interp_matrix(const NodeVector& nodes, const SetPartition& partition) {
  if (partition.ground_size() != nodes.size()) throw ContractError("block_interp_matrix: partition size mismatch");
  const NodeVector x = nodes.unwrapped(partition);
  const int n = nodes.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& block : partition.blocks()) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      double product = 1.0;
      for (std::size_t j = 0; j <= i; ++j) {
        m(block[i], block[j]) = product;
        product *= x[block[i]] - x[block[j]];
      }
    }
  }
  return m;
}

std::vector<double> complete_homogeneous(std::span<const double> y, int max_degree) {
  std::vector<double> h(static_cast<std::size_t>(max_degree) + 1, 0.0);
  h[0] = 1.0;
  // Adding variable y_j: h_d <- h_d + y_j * h_{d-1} (new), in increasing d.
  bool first = true;
  for (double v : y) {
    if (first) {
      double power = 1.0;
      for (int d = 0; d <= max_degree; ++d) {
        h[static_cast<std::size_t>(d)] = power;
        power *= v;
      }
      first = false;
      continue;
    }
    for (int d = 1; d <= max_degree; ++d) h[static_cast<std::size_t>(d)] += v * h[static_cast<std::size_t>(d) - 1];
  }
  return h;
}

Eigen::RowVectorXd newton_basis_divided_differences(std::span<const double> sequence,
                                                    std::span<const double> target) {
  if (sequence.empty() || target.empty()) throw ContractError("newton_basis_divided_differences: empty input");
  const double center = std::accumulate(sequence.begin(), sequence.end(), 0.0) / static_cast<double>(sequence.size());
  const int n = static_cast<int>(sequence.size());
  const int order = static_cast<int>(target.size()) - 1;
  std::vector<double> t(target.begin(), target.end());
  for (double& v : t) v -= center;
  const auto h = complete_homogeneous(t, n);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  // coefficients of N_k in the centered variable, built incrementally
  std::vector<double> coef{1.0};
  for (int k = 0; k < n; ++k) {
    double value = 0.0;
    for (int m = order; m < static_cast<int>(coef.size()); ++m) {
      value += coef[static_cast<std::size_t>(m)] * h[static_cast<std::size_t>(m - order)];
    }
    row(k) = value;
    const double root = sequence[static_cast<std::size_t>(k)] - center;
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t m = 0; m < coef.size(); ++m) {
      next[m + 1] += coef[m];
      next[m] -= root * coef[m];
    }
    coef = std::move(next);
  }
  return row;
}

Eigen::MatrixXd transfer_matrix(const NodeVector& nodes, const SetPartition& coarse, const SetPartition& fine) {
  if (coarse.ground_size() != nodes.size() || fine.ground_size() != nodes.size()) {
    throw ContractError("transfer_matrix: partition size mismatch");
  }
  if (!refines(fine, coarse)) throw ContractError("transfer_matrix: fine partition does not refine the coarse one");
  const NodeVector x = nodes.unwrapped(coarse);
  const int n = nodes.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& cell : coarse.blocks()) {
    std::vector<double> sequence;
    for (int a : cell) sequence.push_back(x[a]);
    for (const auto& piece : fine.blocks()) {
      if (!std::binary_search(cell.begin(), cell.end(), piece.front())) continue;
      std::vector<double> prefix;
      for (int b : piece) {
        prefix.push_back(x[b]);
        const Eigen::RowVectorXd row = newton_basis_divided_differences(sequence, prefix);
        for (std::size_t k = 0; k < cell.size(); ++k) q(b, cell[k]) = row(static_cast<Eigen::Index>(k));
      }
    }
  }
  return q;
}

ClusterPartition cluster_partition(const NodeVector& nodes, double eta) {
  if (!(eta >= 0.0)) throw ContractError("cluster_partition: eta must be non-negative");
  const int n = nodes.size();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (nodes.domain().distance(nodes[a], nodes[b]) <= eta) parent[static_cast<std::size_t>(find(b))] = find(a);
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) labels[static_cast<std::size_t>(a)] = find(a);
  return {SetPartition::from_labels(labels), eta};
}

std::vector<std::vector<double>> dd_coordinate_sequences(const NodeVector& nodes, const SetPartition& partition,
                                                         bool doubled) {
  if (partition.ground_size() != nodes.size()) throw ContractError("dd_coordinate_sequences: partition size mismatch");
  const NodeVector x = nodes.unwrapped(partition);
  const int n = nodes.size();
  std::vector<std::vector<double>> sequences(static_cast<std::size_t>(doubled ? 2 * n : n));
  for (const auto& cell : partition.blocks()) {
    std::vector<double> whole;
    for (int a : cell) whole.push_back(x[a]);
    std::vector<double> prefix;
    for (int a : cell) {
      prefix.push_back(x[a]);
      sequences[static_cast<std::size_t>(a)] = prefix;
      if (doubled) {
        std::vector<double> second = whole;
        second.insert(second.end(), prefix.begin(), prefix.end());
        sequences[static_cast<std::size_t>(n + a)] = std::move(second);
      }
    }
  }
  return sequences;
}

DoubledMatrices doubled_matrices(const NodeVector& nodes, const SetPartition& partition) {
  const int n = nodes.size();
  if (n < 1 || n > kMaxDoubledSize) throw SizeLimitError("doubled_matrices: |A| must lie in [1, 5]");
  if (partition.ground_size() != n) throw ContractError("doubled_matrices: partition size mismatch");
  const NodeVector x = nodes.unwrapped(partition);

  DoubledMatrices out;
  out.ground_size = n;
  out.partition = partition;
  out.entries.resize(std::size_t{1} << n);
  for (SubsetMask mask = 1; mask < (SubsetMask{1} << n); ++mask) {
    DoubledEntry entry;
    entry.subset = mask;
    const auto elements = mask_elements(mask);
    const int nb = static_cast<int>(elements.size());
    entry.induced_partition = induced(partition, mask);
    entry.m_block = block_interp_matrix(x.subset(mask), entry.induced_partition);
    entry.q_doubled = Eigen::MatrixXd::Zero(2 * nb, 2 * n);
    for (const auto& cell : partition.blocks()) {
      std::vector<double> sequence;
      for (int a : cell) sequence.push_back(x[a]);
      for (int a : cell) sequence.push_back(x[a]);
      // columns of this cell in the 2A ordering, in Newton order
      std::vector<int> columns;
      for (int a : cell) columns.push_back(a);
      for (int a : cell) columns.push_back(n + a);

      std::vector<int> local;  // positions (within B) of the elements of cell ∩ B
      std::vector<double> restricted;
      for (int beta = 0; beta < nb; ++beta) {
        if (std::binary_search(cell.begin(), cell.end(), elements[static_cast<std::size_t>(beta)])) {
          local.push_back(beta);
          restricted.push_back(x[elements[static_cast<std::size_t>(beta)]]);
        }
      }
      std::vector<double> prefix;
      for (std::size_t k = 0; k < local.size(); ++k) {
        prefix.push_back(restricted[k]);
        std::vector<double> second = restricted;
        second.insert(second.end(), prefix.begin(), prefix.end());
        const Eigen::RowVectorXd first_row = newton_basis_divided_differences(sequence, prefix);
        const Eigen::RowVectorXd second_row = newton_basis_divided_differences(sequence, second);
        for (std::size_t c = 0; c < columns.size(); ++c) {
          entry.q_doubled(local[k], columns[c]) = first_row(static_cast<Eigen::Index>(c));
          entry.q_doubled(nb + local[k], columns[c]) = second_row(static_cast<Eigen::Index>(c));
        }
      }
    }
    out.entries[mask] = std::move(entry);
  }
  return out;
}

}  // namespace kacrice
