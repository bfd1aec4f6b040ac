#include "psp/sfm.hpp"

#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace psp {

namespace {

// Exhaustive scan over all selections containing `forced`. Key is any
// lexicographically comparable value; smaller keys win. Minimal/maximal
// minimizers are the intersection/union of all argmin selections, which is
// well defined because a submodular objective has a lattice of minimizers.
template <class Key, class Eval>
SfmResult scan_selections(const FusedGround& ground, Mask forced, Eval eval) {
  const auto& blocks = ground.blocks.blocks;
  const int k = static_cast<int>(blocks.size());
  if (k == 0) throw std::invalid_argument("sfm: empty ground");
  if (k > kMaxUsers) throw std::invalid_argument("sfm: more than 22 blocks");

  std::vector<int> free_idx;
  for (int t = 0; t < k; ++t)
    if (!(forced & bit(t))) free_idx.push_back(t);
  const int fc = static_cast<int>(free_idx.size());

  Mask forced_union = 0;
  for (int t = 0; t < k; ++t)
    if (forced & bit(t)) forced_union |= blocks[t];

  SfmResult out;
  bool have_best = false;
  Key best{};
  Mask arg_and = 0, arg_or = 0;
  for (Mask c = 0; c < (Mask{1} << fc); ++c) {
    Mask sel = forced;
    Mask uni = forced_union;
    for (int b = 0; b < fc; ++b)
      if (c & bit(b)) {
        sel |= bit(free_idx[b]);
        uni |= blocks[free_idx[b]];
      }
    Key key = eval(uni, sel);
    ++out.probe_count;
    if (!have_best || key < best) {
      have_best = true;
      best = key;
      arg_and = uni;
      arg_or = uni;
    } else if (key == best) {
      arg_and &= uni;
      arg_or |= uni;
    }
  }
  out.minimal_minimizer = arg_and;
  out.maximal_minimizer = arg_or;
  if constexpr (std::is_same_v<Key, Rational>) {
    out.min_value = best;
  } else {
    out.min_value = best.first;
  }
  return out;
}

}  // namespace

SfmResult sfm_forced(const FusedObjective& obj, const FusedGround& ground) {
  const int k = static_cast<int>(ground.blocks.size());
  if (ground.designated < 0 || ground.designated >= k)
    throw std::invalid_argument("sfm_forced: designated block out of range");
  return scan_selections<Rational>(
      ground, bit(ground.designated),
      [&](Mask uni, Mask sel) { return obj(uni, sel); });
}

SfmResult sfm_left_limit(const FusedAffineObjective& obj,
                         const Rational& lambda0, const FusedGround& ground) {
  const int k = static_cast<int>(ground.blocks.size());
  if (ground.designated < 0 || ground.designated >= k)
    throw std::invalid_argument("sfm_left_limit: designated block out of range");
  // Just below lambda0 the candidate with value v + s*lambda evaluates to
  // v + s*lambda0 - s*eps; ties at lambda0 break toward the larger slope.
  using Key = std::pair<Rational, Rational>;
  return scan_selections<Key>(ground, bit(ground.designated),
                              [&](Mask uni, Mask sel) {
                                AffineFn fn = obj(uni, sel);
                                return Key{fn.value(lambda0), -fn.slope};
                              });
}

SfmResult sfm_unconstrained(const FusedObjective& obj,
                            const FusedGround& ground) {
  return scan_selections<Rational>(
      ground, Mask{0}, [&](Mask uni, Mask sel) { return obj(uni, sel); });
}

}  // namespace psp
