#include "kacrice/partitions.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <mutex>
#include <numeric>
#include <sstream>

#include "kacrice/errors.hpp"

namespace kacrice {

SetPartition::SetPartition(std::vector<Block> blocks, int ground_size) : ground_size_(ground_size) {
  if (ground_size < 0 || ground_size > 32) throw SizeLimitError("SetPartition: ground size must lie in [0, 32]");
  std::vector<int> seen(static_cast<std::size_t>(ground_size), 0);
  for (auto& block : blocks) {
    if (block.empty()) throw ContractError("SetPartition: empty block");
    std::sort(block.begin(), block.end());
    for (int a : block) {
      if (a < 0 || a >= ground_size) throw ContractError("SetPartition: element outside ground set");
      if (seen[static_cast<std::size_t>(a)]++) throw ContractError("SetPartition: blocks are not disjoint");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ContractError("SetPartition: blocks do not cover the ground set");
  }
  std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) { return x.front() < y.front(); });
  blocks_ = std::move(blocks);
}

SetPartition SetPartition::singletons(int ground_size) {
  std::vector<Block> blocks;
  for (int a = 0; a < ground_size; ++a) blocks.push_back({a});
  return SetPartition(std::move(blocks), ground_size);
}

SetPartition SetPartition::single_block(int ground_size) {
  if (ground_size == 0) return SetPartition({}, 0);
  Block all(static_cast<std::size_t>(ground_size));
  std::iota(all.begin(), all.end(), 0);
  return SetPartition({all}, ground_size);
}

SetPartition SetPartition::from_labels(std::span<const int> labels) {
  std::map<int, Block> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(static_cast<int>(i));
  std::vector<Block> blocks;
  for (auto& [label, block] : groups) blocks.push_back(std::move(block));
  return SetPartition(std::move(blocks), static_cast<int>(labels.size()));
}

int SetPartition::block_of(int a) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (std::binary_search(blocks_[k].begin(), blocks_[k].end(), a)) return static_cast<int>(k);
  }
  throw ContractError("SetPartition::block_of: element outside ground set");
}

SubsetMask SetPartition::block_mask(int k) const {
  SubsetMask mask = 0;
  for (int a : blocks_.at(static_cast<std::size_t>(k))) mask |= SubsetMask{1} << a;
  return mask;
}

std::string SetPartition::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (k) out << ',';
    out << '{';
    for (std::size_t j = 0; j < blocks_[k].size(); ++j) {
      if (j) out << ',';
      out << blocks_[k][j];
    }
    out << '}';
  }
  out << '}';
  return out.str();
}

namespace {

// Restricted growth strings: labels[0] = 0, labels[i] <= 1 + max(labels[0..i-1]).
void enumerate_rgs(std::vector<int>& labels, int i, int max_label, std::vector<SetPartition>& out) {
  const int p = static_cast<int>(labels.size());
  if (i == p) {
    out.push_back(SetPartition::from_labels(labels));
    return;
  }
  for (int label = 0; label <= max_label + 1; ++label) {
    labels[static_cast<std::size_t>(i)] = label;
    enumerate_rgs(labels, i + 1, std::max(max_label, label), out);
  }
}

double factorial(int k) {
  double value = 1.0;
  for (int j = 2; j <= k; ++j) value *= j;
  return value;
}

void check_order(std::size_t p) {
  if (p == 0) throw ContractError("moment/cumulant vector must be non-empty");
  if (p > static_cast<std::size_t>(kMaxEnumeratedPartitions)) {
    throw SizeLimitError("moment/cumulant order exceeds the partition enumeration cap of 10");
  }
}

// Enumerations are reused by the transforms, which run once per Monte Carlo batch.
const std::vector<SetPartition>& cached_partitions(int p) {
  static std::array<std::once_flag, kMaxEnumeratedPartitions + 1> flags;
  static std::array<std::vector<SetPartition>, kMaxEnumeratedPartitions + 1> cache;
  std::call_once(flags[static_cast<std::size_t>(p)], [p] { cache[static_cast<std::size_t>(p)] = enumerate_partitions(p); });
  return cache[static_cast<std::size_t>(p)];
}

}  // namespace

std::vector<SetPartition> enumerate_partitions(int p) {
  if (p < 1 || p > kMaxEnumeratedPartitions) {
    throw SizeLimitError("enumerate_partitions: p must lie in [1, 10]");
  }
  std::vector<SetPartition> out;
  out.reserve(bell_number(p));
  std::vector<int> labels(static_cast<std::size_t>(p), 0);
  enumerate_rgs(labels, 1, 0, out);
  return out;
}

bool refines(const SetPartition& fine, const SetPartition& coarse) {
  if (fine.ground_size() != coarse.ground_size()) throw ContractError("refines: mismatched ground sets");
  for (int k = 0; k < fine.size(); ++k) {
    const SubsetMask block = fine.block_mask(k);
    bool contained = false;
    for (int j = 0; j < coarse.size() && !contained; ++j) {
      contained = (block & ~coarse.block_mask(j)) == 0;
    }
    if (!contained) return false;
  }
  return true;
}

SetPartition induced(const SetPartition& i, std::span<const int> b) {
  if (b.empty()) throw ContractError("induced: empty subset");
  if (!std::is_sorted(b.begin(), b.end()) || std::adjacent_find(b.begin(), b.end()) != b.end()) {
    throw ContractError("induced: subset must be sorted without repetitions");
  }
  std::vector<int> labels;
  labels.reserve(b.size());
  for (int a : b) {
    if (a < 0 || a >= i.ground_size()) throw ContractError("induced: subset not contained in the ground set");
    labels.push_back(i.block_of(a));
  }
  return SetPartition::from_labels(labels);
}

SetPartition induced(const SetPartition& i, SubsetMask b) {
  const auto elements = mask_elements(b);
  return induced(i, std::span<const int>(elements));
}

std::vector<int> mask_elements(SubsetMask mask) {
  std::vector<int> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

double mobius_weight(int block_count) {
  const double magnitude = factorial(block_count - 1);
  return (block_count % 2 == 1) ? magnitude : -magnitude;
}

std::vector<double> cumulants_from_moments(std::span<const double> moments) {
  check_order(moments.size());
  std::vector<double> kappa;
  for (int order = 1; order <= static_cast<int>(moments.size()); ++order) {
    double sum = 0.0;
    for (const auto& part : cached_partitions(order)) {
      double term = mobius_weight(part.size());
      for (const auto& block : part.blocks()) term *= moments[block.size() - 1];
      sum += term;
    }
    kappa.push_back(sum);
  }
  return kappa;
}

std::vector<double> moments_from_cumulants(std::span<const double> cumulants) {
  check_order(cumulants.size());
  std::vector<double> m;
  for (int order = 1; order <= static_cast<int>(cumulants.size()); ++order) {
    double sum = 0.0;
    for (const auto& part : cached_partitions(order)) {
      double term = 1.0;
      for (const auto& block : part.blocks()) term *= cumulants[block.size() - 1];
      sum += term;
    }
    m.push_back(sum);
  }
  return m;
}

double joint_cumulant(int ground_size, const std::map<SubsetMask, double>& joint_moments) {
  if (ground_size < 1 || ground_size > kMaxEnumeratedPartitions) {
    throw SizeLimitError("joint_cumulant: family size must lie in [1, 10]");
  }
  const auto lookup = [&](SubsetMask mask) {
    const auto it = joint_moments.find(mask);
    if (it == joint_moments.end()) throw ContractError("joint_cumulant: missing joint moment for a subset");
    return it->second;
  };
  double sum = 0.0;
  for (const auto& part : cached_partitions(ground_size)) {
    double term = mobius_weight(part.size());
    for (int k = 0; k < part.size(); ++k) term *= lookup(part.block_mask(k));
    sum += term;
  }
  return sum;
}

std::uint64_t stirling2(int p, int k) {
  if (p < 0 || p > kMaxStirlingOrder || k < 0 || k > p) {
    throw SizeLimitError("stirling2: require 0 <= k <= p <= 12");
  }
  // S(n, j) = j S(n-1, j) + S(n-1, j-1)
  std::vector<std::vector<std::uint64_t>> table(static_cast<std::size_t>(p) + 1,
                                                std::vector<std::uint64_t>(static_cast<std::size_t>(p) + 1, 0));
  table[0][0] = 1;
  for (int n = 1; n <= p; ++n) {
    for (int j = 1; j <= n; ++j) {
      table[n][j] = static_cast<std::uint64_t>(j) * table[n - 1][j] + table[n - 1][j - 1];
    }
  }
  return table[p][k];
}

std::uint64_t bell_number(int p) {
  std::uint64_t total = 0;
  for (int k = 0; k <= p; ++k) total += stirling2(p, k);
  return total;
}

}  // namespace kacrice
