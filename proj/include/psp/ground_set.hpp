#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "psp/rational.hpp"

namespace psp {

// Users are indices 0..n-1; subsets are bitmasks. n is capped well below 32
// because the exhaustive minimization kernel enumerates subsets.
using Mask = std::uint32_t;

inline Mask bit(int i) { return Mask{1} << i; }
inline int popcount(Mask m) { return std::popcount(m); }
inline int lowest_bit(Mask m) { return std::countr_zero(m); }

constexpr int kMaxUsers = 22;

// Ordered user labels; the file/order index is the canonical identity.
struct GroundSet {
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(labels.size()); }
  Mask full_mask() const { return (Mask{1} << labels.size()) - 1; }
  int index_of(const std::string& label) const;  // -1 when absent

  // "{1,4,5}" using labels, members in index order.
  std::string set_str(Mask x) const;
};

// A partition of some carrier set, stored as disjoint block masks sorted by
// lowest member. Always canonical.
struct Partition {
  std::vector<Mask> blocks;

  static Partition singletons(Mask carrier);
  static Partition single_block(Mask carrier);

  int size() const { return static_cast<int>(blocks.size()); }
  Mask carrier() const;
  Mask block_containing(int user) const;
  void canonicalize();

  // Replaces the blocks intersecting `merged` by their union (with `merged`'s
  // own members added even if new to the carrier).
  Partition merge_overlapping(Mask merged) const;

  // Adds {singleton} as a fresh block.
  Partition with_singleton(int user) const;

  bool operator==(const Partition&) const = default;
  std::string str(const GroundSet& g) const;  // "{{1,4,5},{2},{3}}"
};

// Throws std::invalid_argument unless `order` is a permutation of 0..n-1.
void validate_order(const std::vector<int>& order, int n);

// Whether p refines q (every block of p is contained in some block of q).
// Both must partition the same carrier.
bool refines(const Partition& p, const Partition& q);

// Common refinement (meet) of two partitions of the same carrier.
Partition meet(const Partition& p, const Partition& q);

// Splits x along the blocks of p. x must be a union of blocks of p; throws
// otherwise.
std::vector<Mask> decompose(Mask x, const Partition& p);

// All partitions of the carrier (restricted-growth enumeration). Guarded to
// 12 members; the count is the Bell number.
std::vector<Partition> enumerate_partitions(Mask carrier);

// All ways of grouping the given atoms (disjoint blocks) into a coarser
// partition; atoms.size() <= 12.
std::vector<std::vector<Mask>> enumerate_groupings(
    const std::vector<Mask>& atoms);

}  // namespace psp
