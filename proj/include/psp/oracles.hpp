#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "psp/oracle.hpp"

namespace psp {

// Entropy of independent uniform bits assigned to users: f(X) = number of
// distinct bits observed by X.
class BitAssignmentSource : public SubmodularOracle {
 public:
  static constexpr int kMaxBits = 256;
  using BitSet = std::array<std::uint64_t, kMaxBits / 64>;

  // assignment[i] = bit ids observed by user i; ids are dense in [0, kMaxBits).
  BitAssignmentSource(GroundSet ground, std::vector<std::vector<int>> bits);

  const GroundSet& ground() const override { return ground_; }
  Rational value(Mask x) const override;
  bool monotone() const override { return true; }

 private:
  GroundSet ground_;
  std::vector<BitSet> user_bits_;
};

// Entropy of a finite linear source over GF(2): user i observes the linear
// combinations given by the rows of their generator matrix; f(X) = rank of
// the stacked rows of X.
class MatrixSourceGF2 : public SubmodularOracle {
 public:
  static constexpr int kMaxCols = 64;

  // rows[i] = the rows owned by user i, each a column bitmask.
  MatrixSourceGF2(GroundSet ground, std::vector<std::vector<std::uint64_t>> rows,
                  int cols);

  const GroundSet& ground() const override { return ground_; }
  Rational value(Mask x) const override;
  bool monotone() const override { return true; }

 private:
  GroundSet ground_;
  std::vector<std::vector<std::uint64_t>> user_rows_;
  int cols_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Mask, int> rank_cache_;
};

// Cut function of an undirected weighted graph on the users: f(X) = total
// weight of edges with exactly one endpoint in X. f(V) = 0; not monotone.
class WeightedGraphCut : public SubmodularOracle {
 public:
  struct Edge {
    int u, v;
    Rational weight;  // > 0
  };

  WeightedGraphCut(GroundSet ground, std::vector<Edge> edges);

  const GroundSet& ground() const override { return ground_; }
  Rational value(Mask x) const override;
  bool monotone() const override { return edges_.empty(); }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  GroundSet ground_;
  std::vector<Edge> edges_;
};

// Explicit value table over every subset; validated submodular at load.
class TableOracle : public SubmodularOracle {
 public:
  static constexpr int kMaxTableUsers = 12;

  // values[mask] = f(mask); values[0] must be 0. Throws std::invalid_argument
  // naming the violating pair when not submodular.
  TableOracle(GroundSet ground, std::vector<Rational> values);

  const GroundSet& ground() const override { return ground_; }
  Rational value(Mask x) const override { return values_[x]; }
  bool monotone() const override { return monotone_; }

 private:
  GroundSet ground_;
  std::vector<Rational> values_;
  bool monotone_;
};

// f confined to a subset of the users (other users simply do not exist for
// the restriction; masks stay in the base indexing).
class RestrictedOracle : public SubmodularOracle {
 public:
  RestrictedOracle(const SubmodularOracle& base, Mask carrier);

  const GroundSet& ground() const override { return ground_; }
  Rational value(Mask x) const override;
  bool monotone() const override { return base_.monotone(); }
  Mask carrier() const { return carrier_; }
  // Mask translation between restricted indices (dense) and base indices.
  Mask to_base(Mask restricted) const;
  Mask from_base(Mask base_mask) const;

 private:
  const SubmodularOracle& base_;
  Mask carrier_;
  GroundSet ground_;
  std::vector<int> base_index_;  // restricted index -> base index
};

GroundSet default_ground(int n);  // labels "1".."n"

}  // namespace psp
