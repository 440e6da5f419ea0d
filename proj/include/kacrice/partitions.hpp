#pragma once

// Set partitions of {0,...,p-1} and the moment/cumulant transforms over the
// partition lattice.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kacrice {

using Block = std::vector<int>;

// Bitmask over a ground set of at most 32 elements.
using SubsetMask = std::uint32_t;

inline constexpr int kMaxEnumeratedPartitions = 10;
inline constexpr int kMaxStirlingOrder = 12;

class SetPartition {
 public:
  SetPartition() = default;

  // Validates disjointness/coverage and stores the canonical form
  // (elements sorted in each block, blocks sorted by least element).
  SetPartition(std::vector<Block> blocks, int ground_size);

  static SetPartition singletons(int ground_size);
  static SetPartition single_block(int ground_size);

  // Partition from a label vector: element i goes to the block labelled labels[i].
  static SetPartition from_labels(std::span<const int> labels);

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  int ground_size() const noexcept { return ground_size_; }
  int size() const noexcept { return static_cast<int>(blocks_.size()); }

  // Index of the block containing element a.
  int block_of(int a) const;

  // Bitmask of block k.
  SubsetMask block_mask(int k) const;

  std::string to_string() const;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
  friend auto operator<=>(const SetPartition&, const SetPartition&) = default;

 private:
  std::vector<Block> blocks_;
  int ground_size_ = 0;
};

// All partitions of {0,...,p-1} in canonical form; 1 <= p <= 10.
std::vector<SetPartition> enumerate_partitions(int p);

// True iff every block of `fine` is contained in a block of `coarse`.
bool refines(const SetPartition& fine, const SetPartition& coarse);

// Partition of the sorted subset `b` induced by `i`, re-indexed so that b[k] becomes k.
SetPartition induced(const SetPartition& i, std::span<const int> b);

// Mask version of induced(): `b` given as a bitmask over the ground set.
SetPartition induced(const SetPartition& i, SubsetMask b);

// Elements of a mask in increasing order.
std::vector<int> mask_elements(SubsetMask mask);

// Exact partition sums; input index k-1 holds the order-k moment (resp. cumulant).
std::vector<double> cumulants_from_moments(std::span<const double> moments);
std::vector<double> moments_from_cumulants(std::span<const double> cumulants);

// Joint cumulant of a family indexed by {0,...,ground_size-1}; `joint_moments`
// must contain every nonempty subset.
double joint_cumulant(int ground_size, const std::map<SubsetMask, double>& joint_moments);

// (|J|-1)! (-1)^{|J|-1}
double mobius_weight(int block_count);

std::uint64_t stirling2(int p, int k);
std::uint64_t bell_number(int p);

}  // namespace kacrice
