#include "psp/psp.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace psp {

namespace {

// Sum of the plain oracle values over the blocks of a partition.
Rational raw_block_sum(const SubmodularOracle& o, const Partition& p) {
  Rational s(0);
  for (Mask b : p.blocks) s += o.value(b);
  return s;
}

// Level at which the residual sums of two partitions coincide. p_fine must
// have strictly more blocks than p_coarse.
Rational crossing_level(const SubmodularOracle& o, const Partition& p_fine,
                        const Partition& p_coarse) {
  int diff = p_fine.size() - p_coarse.size();
  if (diff <= 0) throw std::logic_error("crossing_level: bracket not refining");
  return o.total() -
         (raw_block_sum(o, p_fine) - raw_block_sum(o, p_coarse)) /
             Rational(diff);
}

}  // namespace

const SfmResult& IterationContext::probe(const Rational& alpha) {
  auto it = probe_memo.find(alpha);
  if (it != probe_memo.end()) return it->second;

  const Partition& g = ground.at(alpha);
  FusedGround fused{g, -1};
  for (int b = 0; b < g.size(); ++b)
    if (g.blocks[b] >> user & 1) fused.designated = b;
  if (fused.designated < 0)
    throw std::logic_error("probe: user missing from the fused ground");

  std::vector<Rational> block_rate;
  block_rate.reserve(g.blocks.size());
  for (Mask b : g.blocks) {
    Rational s(0);
    for (int u = 0; u < oracle.size(); ++u)
      if (b >> u & 1) s += piecewise_value(rates[u], alpha);
    block_rate.push_back(std::move(s));
  }
  FusedObjective obj = [&](Mask uni, Mask sel) {
    Rational v = residual(oracle, alpha, uni);
    for (int b = 0; b < g.size(); ++b)
      if (sel >> b & 1) v -= block_rate[b];
    return v;
  };

  SfmResult res = sfm_forced(obj, fused);
  sfm_calls += 1;
  sfm_evals += res.probe_count;
  probe_log.emplace_back(alpha, res);
  return probe_memo.emplace(alpha, std::move(res)).first->second;
}

namespace {

// Bisection on bracketing partitions: probes at their crossing level, splits
// on the partition built from the minimizer there, and bottoms out when that
// partition reproduces the finer bracket.
std::vector<Mask> str_map_rec(const Partition& p_down, const Partition& p_up,
                              IterationContext& ctx) {
  if (++ctx.depth > 4 * ctx.oracle.size() + 8)
    throw std::logic_error("str_map: bisection failed to terminate");
  Rational alpha = crossing_level(ctx.oracle, p_down, p_up);
  const SfmResult& res = ctx.probe(alpha);
  Partition p = ctx.ground.at(alpha).merge_overlapping(res.minimal_minimizer);
  if (p == p_down) return {res.minimal_minimizer};
  if (p == p_up)
    throw std::logic_error("str_map: probe reproduced the coarse bracket");
  std::vector<Mask> low = str_map_rec(p_down, p, ctx);
  std::vector<Mask> high = str_map_rec(p, p_up, ctx);
  low.insert(low.end(), high.begin(), high.end());
  return low;
}

}  // namespace

std::vector<Mask> str_map(const Partition& p_down, const Partition& p_up,
                          IterationContext& ctx) {
  std::vector<Mask> sets{bit(ctx.user), ctx.prefix};
  if (!(p_down == p_up)) {
    std::vector<Mask> found = str_map_rec(p_down, p_up, ctx);
    sets.insert(sets.end(), found.begin(), found.end());
  }
  std::sort(sets.begin(), sets.end(), [](Mask a, Mask b) {
    return popcount(a) != popcount(b) ? popcount(a) < popcount(b) : a < b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  for (size_t t = 0; t + 1 < sets.size(); ++t)
    if (sets[t] & ~sets[t + 1])
      throw std::logic_error("str_map: minimizer sets not nested");
  return sets;
}

std::vector<Rational> critical_points(const std::vector<Mask>& chain,
                                      const SegmentedRateVector& rates,
                                      const SubmodularOracle& o) {
  const Rational wlo = window_alpha_lo(o);
  const Rational whi = o.total();
  std::vector<Rational> out;
  // Each pair's segment starts where the previous one ended; search from
  // there so a spurious root below it (rates may dip) cannot be picked up.
  for (size_t t = 0; t + 1 < chain.size(); ++t) {
    Mask diff = chain[t + 1] & ~chain[t];
    PiecewiseAffine lhs = sum_rates(rates, diff);
    Rational rhs = o.value(chain[t + 1]) - o.value(chain[t]);
    std::optional<Rational> x =
        solve_affine(lhs, rhs, out.empty() ? wlo : out.back(), whi);
    if (!x)
      throw std::logic_error("critical_points: adjacent sets never cross");
    if (!out.empty() && !(out.back() < *x))
      throw std::logic_error("critical_points: crossings out of order");
    out.push_back(std::move(*x));
  }
  return out;
}

PspReport par(const SubmodularOracle& o, const std::vector<int>& order,
              ParTrace* trace) {
  const int n = o.size();
  if (n == 0) throw std::invalid_argument("par: empty ground set");
  validate_order(order, n);
  const Rational whi = o.total();
  const Rational wlo = window_alpha_lo(o);
  const Mask full = o.full_mask();

  SegmentedRateVector rates(
      n, PiecewiseAffine::constant(wlo, whi, Closure::UpperClosed,
                                   AffineFn{Rational(1), -whi}));
  const int first = order[0];
  rates[first] = PiecewiseAffine::constant(
      wlo, whi, Closure::UpperClosed,
      AffineFn{Rational(1), o.value(bit(first)) - whi});
  Segmented<Partition> q_seg = Segmented<Partition>::constant(
      wlo, whi, Closure::UpperClosed, Partition::singletons(bit(first)));
  Mask prefix = bit(first);
  long calls = 0;

  for (int i = 1; i < n; ++i) {
    const int phi = order[i];
    prefix |= bit(phi);
    Segmented<Partition> ground =
        q_seg.map([&](const Partition& p) { return p.with_singleton(phi); });
    IterationContext ctx{o, phi, prefix, std::move(ground), rates};
    std::vector<Mask> chain = str_map(Partition::singletons(prefix),
                                      Partition::single_block(prefix), ctx);
    std::vector<Rational> criticals = critical_points(chain, rates, o);
    std::vector<Mask> chain_full = chain;
    std::vector<Rational> criticals_full = criticals;
    // The topmost set only matters below its crossing; a crossing at the
    // window top leaves it no segment at all.
    if (!criticals.empty() && criticals.back() == whi) {
      criticals.pop_back();
      chain.pop_back();
    }

    Segmented<Mask> chain_seg;
    chain_seg.lo = wlo;
    chain_seg.hi = whi;
    chain_seg.closure = Closure::UpperClosed;
    chain_seg.cuts = criticals;
    chain_seg.vals.assign(chain.begin(), chain.end());
    chain_seg.validate();

    // Lift of the new user's rate: the fused residual of the active chain
    // set, evaluated against the pre-update rates on every subinterval where
    // both the chain set and the rate pieces are fixed.
    std::vector<Rational> cuts = criticals;
    for (int u = 0; u < n; ++u)
      if (prefix >> u & 1)
        cuts.insert(cuts.end(), rates[u].cuts.begin(), rates[u].cuts.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    PiecewiseAffine lift;
    lift.lo = wlo;
    lift.hi = whi;
    lift.closure = Closure::UpperClosed;
    lift.cuts = cuts;
    for (size_t k = 0; k <= cuts.size(); ++k) {
      Rational x = k == cuts.size() ? whi : cuts[k];
      Mask u_set = chain_seg.at(x);
      AffineFn fn{Rational(1), o.value(u_set) - whi};
      for (int u = 0; u < n; ++u)
        if (u_set >> u & 1) fn = fn - rates[u].at(x);
      lift.vals.push_back(fn);
    }
    lift.canonicalize();
    rates[phi] = combine(rates[phi], lift,
                         [](const AffineFn& a, const AffineFn& b) { return a + b; });
    q_seg = combine(ctx.ground, chain_seg, [](const Partition& g, Mask u) {
      return g.merge_overlapping(u);
    });
    for (int k = 0; k + 1 < q_seg.pieces(); ++k)
      if (!refines(q_seg.vals[k], q_seg.vals[k + 1]))
        throw std::logic_error("par: partition sweep not coarsening");
    // Probe accounting: each distinct probe level either certifies that two
    // sweep partitions are adjacent or discovers a new one, so the spend is
    // bounded by twice the number of sweep boundaries this iteration ends up
    // with (counting a boundary at the window top that no segment survives).
    long found = static_cast<long>(q_seg.cuts.size());
    if (criticals_full.size() != criticals.size()) found += 1;
    if (ctx.sfm_calls > 2 * found + 1)
      throw std::logic_error("par: probe budget exceeded");
    calls += ctx.sfm_calls;
    if (trace)
      trace->iterations.push_back({phi, std::move(chain_full),
                                   std::move(criticals_full), rates, q_seg,
                                   ctx.sfm_calls});
  }

  Psp psp;
  psp.alpha0 = whi;
  psp.critical_points = q_seg.cuts;
  psp.chain = q_seg.vals;
  if (!(psp.chain.back() == Partition::single_block(full))) {
    // The single block only ties at the window top; close the hierarchy
    // there and flag that it is never the unique optimum.
    psp.chain.push_back(Partition::single_block(full));
    psp.critical_points.push_back(whi);
    psp.degenerate = true;
  }
  return derive_report(std::move(psp), std::move(rates), std::move(q_seg),
                       calls);
}

namespace {

using ProbeFn = std::function<Partition(const Rational&)>;

// Recursive bisection between bracketing partitions; appends the boundary
// levels and the strictly intermediate partitions in sweep order.
void bisect_hierarchy(const SubmodularOracle& o, const Partition& fine,
                      const Partition& coarse, const ProbeFn& probe,
                      std::vector<Rational>& criticals,
                      std::vector<Partition>& chain, int depth) {
  if (depth > 4 * o.size() + 8)
    throw std::logic_error("hierarchy bisection failed to terminate");
  Rational alpha = crossing_level(o, fine, coarse);
  Partition q = probe(alpha);
  if (q == fine) {
    criticals.push_back(std::move(alpha));
    return;
  }
  if (q == coarse)
    throw std::logic_error("hierarchy bisection: no refinement at probe");
  bisect_hierarchy(o, fine, q, probe, criticals, chain, depth + 1);
  chain.push_back(q);
  bisect_hierarchy(o, q, coarse, probe, criticals, chain, depth + 1);
}

Psp hierarchy_by_bisection(const SubmodularOracle& o, const ProbeFn& probe) {
  Psp out;
  out.alpha0 = o.total();
  const Mask full = o.full_mask();
  Partition fine = Partition::singletons(full);
  Partition coarse = Partition::single_block(full);
  if (fine == coarse) {
    out.chain.push_back(std::move(fine));
    return out;
  }
  out.chain.push_back(fine);
  bisect_hierarchy(o, fine, coarse, probe, out.critical_points, out.chain, 0);
  out.chain.push_back(coarse);
  for (size_t t = 0; t + 1 < out.critical_points.size(); ++t)
    if (!(out.critical_points[t] < out.critical_points[t + 1]))
      throw std::logic_error("hierarchy bisection: levels out of order");
  out.degenerate = !out.critical_points.empty() &&
                   out.critical_points.back() == out.alpha0;
  return out;
}

}  // namespace

Psp decomposition_algorithm(const SubmodularOracle& o, std::vector<int> order,
                            SfmStats* stats) {
  const int n = o.size();
  if (n == 0) throw std::invalid_argument("decomposition: empty ground set");
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }
  validate_order(order, n);
  ProbeFn probe = [&](const Rational& alpha) {
    return coord_sat_cap(o, alpha, order, stats).partition;
  };
  return hierarchy_by_bisection(o, probe);
}

std::vector<int> weighted_ordering(const std::vector<Rational>& weights) {
  for (const Rational& w : weights)
    if (!(Rational(0) < w))
      throw std::invalid_argument("weighted_ordering: weights must be positive");
  std::vector<int> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] < weights[b]; });
  return order;
}

namespace {

Rational eval_extrapolated(const PiecewiseAffine& f, const Rational& x) {
  if (!(f.hi < x)) return piecewise_value(f, x);
  return f.vals.back().value(x);  // hold the top piece beyond the window
}

}  // namespace

PspReport derive_report(Psp psp, SegmentedRateVector rates,
                        Segmented<Partition> partition_sweep,
                        long sfm_call_count) {
  PspReport out;
  out.r_aco = psp.critical_points.empty() ? Rational(0)
                                          : psp.critical_points.back();
  out.r_nco = out.r_aco.ceil();
  out.fundamental_partition = psp.chain.size() >= 2
                                  ? psp.chain[psp.chain.size() - 2]
                                  : psp.chain.back();
  out.mmi = psp.alpha0 - out.r_aco;
  for (const PiecewiseAffine& r : rates) {
    out.optimal_rate_aco.push_back(eval_extrapolated(r, out.r_aco));
    out.optimal_rate_nco.push_back(eval_extrapolated(r, out.r_nco));
  }
  out.sfm_call_count = sfm_call_count;
  out.psp = std::move(psp);
  out.rates = std::move(rates);
  out.partition_sweep = std::move(partition_sweep);
  return out;
}

Psp brute_psp(const SubmodularOracle& o) {
  if (o.size() > 10)
    throw std::invalid_argument("brute_psp: more than 10 users");
  if (o.size() == 0) throw std::invalid_argument("brute_psp: empty ground set");
  ProbeFn probe = [&](const Rational& alpha) {
    return dilworth_brute(o, alpha).partition;
  };
  return hierarchy_by_bisection(o, probe);
}

Psp brute_psp_sweep(const SubmodularOracle& o) {
  const int n = o.size();
  if (n > 5) throw std::invalid_argument("brute_psp_sweep: more than 5 users");
  if (n == 0) throw std::invalid_argument("brute_psp_sweep: empty ground set");
  const Mask full = o.full_mask();
  const Rational whi = o.total();
  const Rational wlo = window_alpha_lo(o);
  Psp out;
  out.alpha0 = whi;
  if (n == 1) {
    out.chain.push_back(Partition::single_block(full));
    return out;
  }

  // Every level where two partition value lines intersect is a candidate
  // breakpoint of the lower envelope; probing each one exactly recovers the
  // hierarchy without assuming anything about its structure.
  std::vector<Partition> parts = enumerate_partitions(full);
  std::vector<Rational> cand;
  for (size_t i = 0; i < parts.size(); ++i)
    for (size_t j = i + 1; j < parts.size(); ++j) {
      if (parts[i].size() == parts[j].size()) continue;
      const Partition& fine =
          parts[i].size() > parts[j].size() ? parts[i] : parts[j];
      const Partition& coarse =
          parts[i].size() > parts[j].size() ? parts[j] : parts[i];
      Rational a = crossing_level(o, fine, coarse);
      if (!(a < wlo) && a < whi) cand.push_back(std::move(a));
    }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  Segmented<Partition> sweep;
  sweep.lo = wlo;
  sweep.hi = whi;
  sweep.closure = Closure::UpperClosed;
  sweep.cuts = cand;
  for (const Rational& a : cand)
    sweep.vals.push_back(dilworth_brute(o, a).partition);
  sweep.vals.push_back(dilworth_brute(o, whi).partition);
  sweep.canonicalize();

  out.critical_points = sweep.cuts;
  out.chain = sweep.vals;
  for (size_t t = 0; t + 1 < out.chain.size(); ++t)
    if (!refines(out.chain[t], out.chain[t + 1]))
      throw std::logic_error("brute_psp_sweep: sweep not coarsening");
  if (!(out.chain.back() == Partition::single_block(full))) {
    out.chain.push_back(Partition::single_block(full));
    out.critical_points.push_back(whi);
    out.degenerate = true;
  }
  return out;
}

Rational mmi_by_enumeration(const SubmodularOracle& o) {
  if (o.size() > 10)
    throw std::invalid_argument("mmi_by_enumeration: more than 10 users");
  if (o.size() < 2)
    throw std::invalid_argument("mmi_by_enumeration: needs two users");
  std::optional<Rational> best;
  for (const Partition& p : enumerate_partitions(o.full_mask())) {
    if (p.size() < 2) continue;
    Rational v = (raw_block_sum(o, p) - o.total()) / Rational(p.size() - 1);
    if (!best || v < *best) best = std::move(v);
  }
  return *best;
}

bool check_sw_feasible(const SubmodularOracle& o,
                       const std::vector<Rational>& rate, const Rational& sum) {
  const int n = o.size();
  if (static_cast<int>(rate.size()) != n)
    throw std::invalid_argument("check_sw_feasible: rate vector size");
  const Mask full = o.full_mask();
  Rational total(0);
  for (const Rational& r : rate) total += r;
  if (total != sum) return false;

  auto covered = [&](Mask x) {
    Rational rx(0);
    for (int u = 0; u < n; ++u)
      if (x >> u & 1) rx += rate[u];
    return !(rx < o.total() - o.value(full & ~x));
  };
  if (n <= 15) {
    for (Mask x = 1; x < full; ++x)
      if (!covered(x)) return false;
    return true;
  }
  for (int u = 0; u < n; ++u)
    if (!covered(bit(u)) || !covered(full & ~bit(u))) return false;
  std::mt19937 rng(7u);  // deterministic spot checks above the cap
  std::uniform_int_distribution<Mask> dist(1, full - 1);
  for (int k = 0; k < 20000; ++k)
    if (!covered(dist(rng))) return false;
  return true;
}

}  // namespace psp
