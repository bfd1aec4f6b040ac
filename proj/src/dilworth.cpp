#include "psp/dilworth.hpp"

#include <algorithm>
#include <stdexcept>

namespace psp {

namespace {

void check_window(const SubmodularOracle& o, const Rational& alpha) {
  if (alpha < window_alpha_lo(o) || o.total() < alpha)
    throw std::domain_error("alpha outside the sweep window");
}

}  // namespace

DilworthResult coord_sat_cap(const SubmodularOracle& o, const Rational& alpha,
                             const std::vector<int>& order, SfmStats* stats,
                             CoordSatCapTrace* trace) {
  validate_order(order, o.size());
  check_window(o, alpha);
  const int n = o.size();

  std::vector<Rational> r(n, alpha - o.total());
  const int first = order[0];
  r[first] = residual(o, alpha, bit(first));
  Partition q = Partition::singletons(bit(first));
  if (trace) trace->steps.push_back({first, bit(first), r, q});

  for (int i = 1; i < n; ++i) {
    const int phi = order[i];
    Partition ground = q.with_singleton(phi);
    const auto& blocks = ground.blocks;
    int designated = -1;
    std::vector<Rational> block_rate;
    block_rate.reserve(blocks.size());
    for (int t = 0; t < static_cast<int>(blocks.size()); ++t) {
      Rational s(0);
      for (int u = 0; u < n; ++u)
        if (blocks[t] & bit(u)) s += r[u];
      block_rate.push_back(s);
      if (blocks[t] == bit(phi)) designated = t;
    }
    FusedObjective obj = [&](Mask uni, Mask sel) {
      Rational v = residual(o, alpha, uni);
      for (int t = 0; t < static_cast<int>(blocks.size()); ++t)
        if (sel & bit(t)) v -= block_rate[t];
      return v;
    };
    SfmResult res = sfm_forced(obj, FusedGround{ground, designated});
    if (stats) {
      ++stats->calls;
      stats->evals += res.probe_count;
    }
    r[phi] += res.min_value;
    q = ground.merge_overlapping(res.minimal_minimizer);
    if (trace) trace->steps.push_back({phi, res.minimal_minimizer, r, q});
  }

  Rational total(0);
  for (const Rational& x : r) total += x;
  return DilworthResult{alpha, r, q, total};
}

DilworthResult dilworth_brute(const SubmodularOracle& o, const Rational& alpha,
                              std::optional<Mask> carrier) {
  check_window(o, alpha);
  const Mask car = carrier.value_or(o.full_mask());
  if (car == 0) throw std::invalid_argument("dilworth_brute: empty carrier");
  if (popcount(car) > 10)
    throw std::invalid_argument("dilworth_brute: carrier larger than 10");

  std::vector<Partition> all = enumerate_partitions(car);
  bool have = false;
  Rational best(0);
  Partition finest;
  for (const Partition& p : all) {
    Rational v = partition_value(o, alpha, p);
    if (!have || v < best) {
      have = true;
      best = v;
      finest = p;
    } else if (v == best) {
      finest = meet(finest, p);
    }
  }
  return DilworthResult{alpha, {}, finest, best};
}

}  // namespace psp
