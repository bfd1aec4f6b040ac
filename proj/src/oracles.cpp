#include "psp/oracles.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace psp {

Rational window_alpha_lo(const SubmodularOracle& o) {
  if (o.monotone()) return Rational(0);
  // Largest possible threshold breakpoint: every crossing has the form
  // (sum of block values)/(partition size delta); bound all |f(X)| first.
  Rational pos_singletons(0);
  for (int i = 0; i < o.size(); ++i)
    pos_singletons += max(Rational(0), o.value(bit(i)));
  Rational m = pos_singletons + pos_singletons + o.total().abs();
  Rational cap = Rational(4 * std::max(1, o.size())) * (m + Rational(1));
  return o.total() - cap;
}

Rational residual(const SubmodularOracle& o, const Rational& a, Mask x) {
  if (!x) return Rational(0);
  return a - o.total() + o.value(x);
}

Rational partition_value(const SubmodularOracle& o, const Rational& a,
                         const Partition& p) {
  Rational sum(0);
  for (Mask b : p.blocks) sum += residual(o, a, b);
  return sum;
}

Rational residual_lambda(const SubmodularOracle& o, const Rational& l, Mask x) {
  if (!x) return Rational(0);
  return o.value(x) - l;
}

Rational partition_value_lambda(const SubmodularOracle& o, const Rational& l,
                                const Partition& p) {
  Rational sum(0);
  for (Mask b : p.blocks) sum += residual_lambda(o, l, b);
  return sum;
}

std::string SubmodularityViolation::describe(const GroundSet& g) const {
  return "submodularity violated at base " + g.set_str(base) + " with pair {" +
         g.labels[i] + "," + g.labels[j] + "}";
}

std::optional<SubmodularityViolation> find_submodularity_violation(
    const SubmodularOracle& o) {
  int n = o.size();
  if (n > 12)
    throw std::invalid_argument("check_submodular: more than 12 users");
  Mask full = o.full_mask();
  for (Mask base = 0; base <= full; ++base) {
    for (int i = 0; i < n; ++i) {
      if (base & bit(i)) continue;
      for (int j = i + 1; j < n; ++j) {
        if (base & bit(j)) continue;
        // Diminishing returns: adding j helps X∪{i} no more than X.
        if (o.value(base | bit(i)) + o.value(base | bit(j)) <
            o.value(base | bit(i) | bit(j)) + o.value(base))
          return SubmodularityViolation{base, i, j};
      }
    }
  }
  return std::nullopt;
}

bool check_submodular(const SubmodularOracle& o) {
  return !find_submodularity_violation(o).has_value();
}

BitAssignmentSource::BitAssignmentSource(GroundSet ground,
                                         std::vector<std::vector<int>> bits)
    : ground_(std::move(ground)) {
  if (bits.size() != static_cast<size_t>(ground_.size()))
    throw std::invalid_argument("bit source: one bit list per user required");
  for (const auto& ids : bits) {
    BitSet s{};
    for (int id : ids) {
      if (id < 0 || id >= kMaxBits)
        throw std::invalid_argument("bit source: bit id out of range");
      s[id / 64] |= std::uint64_t{1} << (id % 64);
    }
    user_bits_.push_back(s);
  }
}

Rational BitAssignmentSource::value(Mask x) const {
  BitSet acc{};
  for (int i = 0; i < ground_.size(); ++i)
    if (x & bit(i))
      for (size_t w = 0; w < acc.size(); ++w) acc[w] |= user_bits_[i][w];
  long bits = 0;
  for (std::uint64_t w : acc) bits += std::popcount(w);
  return Rational(bits);
}

MatrixSourceGF2::MatrixSourceGF2(GroundSet ground,
                                 std::vector<std::vector<std::uint64_t>> rows,
                                 int cols)
    : ground_(std::move(ground)), user_rows_(std::move(rows)), cols_(cols) {
  if (user_rows_.size() != static_cast<size_t>(ground_.size()))
    throw std::invalid_argument("gf2 source: one row list per user required");
  if (cols_ < 0 || cols_ > kMaxCols)
    throw std::invalid_argument("gf2 source: too many columns");
}

Rational MatrixSourceGF2::value(Mask x) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = rank_cache_.find(x);
    if (it != rank_cache_.end()) return Rational(it->second);
  }
  std::array<std::uint64_t, kMaxCols> pivot{};  // indexed by leading bit
  int rank = 0;
  for (int i = 0; i < ground_.size(); ++i) {
    if (!(x & bit(i))) continue;
    for (std::uint64_t row : user_rows_[i]) {
      while (row) {
        int h = 63 - std::countl_zero(row);
        if (!pivot[h]) {
          pivot[h] = row;
          ++rank;
          break;
        }
        row ^= pivot[h];
      }
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  rank_cache_.emplace(x, rank);
  return Rational(rank);
}

WeightedGraphCut::WeightedGraphCut(GroundSet ground, std::vector<Edge> edges)
    : ground_(std::move(ground)), edges_(std::move(edges)) {
  for (const auto& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= ground_.size() || e.v >= ground_.size() ||
        e.u == e.v)
      throw std::invalid_argument("graph: bad edge endpoints");
    if (!(Rational(0) < e.weight))
      throw std::invalid_argument("graph: edge weight must be positive");
  }
}

Rational WeightedGraphCut::value(Mask x) const {
  Rational sum(0);
  for (const auto& e : edges_) {
    bool in_u = x & bit(e.u), in_v = x & bit(e.v);
    if (in_u != in_v) sum += e.weight;
  }
  return sum;
}

TableOracle::TableOracle(GroundSet ground, std::vector<Rational> values)
    : ground_(std::move(ground)), values_(std::move(values)) {
  int n = ground_.size();
  if (n > kMaxTableUsers)
    throw std::invalid_argument("table: more than 12 users");
  if (values_.size() != (size_t{1} << n))
    throw std::invalid_argument("table: need a value for every subset");
  if (values_[0] != Rational(0))
    throw std::invalid_argument("table: empty set must map to 0");
  if (auto v = find_submodularity_violation(*this))
    throw std::invalid_argument("table: " + v->describe(ground_));
  monotone_ = true;
  for (Mask x = 0; x <= full_mask() && monotone_; ++x)
    for (int i = 0; i < n; ++i)
      if (!(x & bit(i)) && values_[x | bit(i)] < values_[x]) {
        monotone_ = false;
        break;
      }
}

RestrictedOracle::RestrictedOracle(const SubmodularOracle& base, Mask carrier)
    : base_(base), carrier_(carrier) {
  for (int i = 0; i < base.size(); ++i) {
    if (!(carrier & bit(i))) continue;
    ground_.labels.push_back(base.ground().labels[i]);
    base_index_.push_back(i);
  }
}

Mask RestrictedOracle::to_base(Mask restricted) const {
  Mask out = 0;
  for (size_t k = 0; k < base_index_.size(); ++k)
    if (restricted & bit(static_cast<int>(k))) out |= bit(base_index_[k]);
  return out;
}

Mask RestrictedOracle::from_base(Mask base_mask) const {
  Mask out = 0;
  for (size_t k = 0; k < base_index_.size(); ++k)
    if (base_mask & bit(base_index_[k])) out |= bit(static_cast<int>(k));
  return out;
}

Rational RestrictedOracle::value(Mask x) const {
  return base_.value(to_base(x));
}

GroundSet default_ground(int n) {
  GroundSet g;
  for (int i = 1; i <= n; ++i) g.labels.push_back(std::to_string(i));
  return g;
}

}  // namespace psp
