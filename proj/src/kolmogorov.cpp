#include "psp/kolmogorov.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <stdexcept>
#include <utility>

namespace psp {

namespace {

// Probe state of one iteration. Rates are read at face value over the full
// ground set; only sets containing the newcomer are feasible.
struct KolContext {
  const SubmodularOracle& oracle;
  int user;
  const SegmentedRateVector& rates;
  std::map<Rational, SfmResult> memo{};       // minimizers at a threshold
  std::map<Rational, SfmResult> left_memo{};  // minimizers just below one
  long calls = 0;
  long tie_branches = 0;
  int depth = 0;

  FusedGround ground() const {
    return {Partition::singletons(oracle.full_mask()), user};
  }

  const SfmResult& probe(const Rational& lambda) {
    auto it = memo.find(lambda);
    if (it != memo.end()) return it->second;
    std::vector<Rational> rv;
    for (const PiecewiseAffine& r : rates)
      rv.push_back(piecewise_value(r, lambda));
    auto obj = [&](Mask uni, Mask) {
      Rational s(0);
      for (Mask m = uni; m != 0; m &= m - 1)
        s += rv[std::countr_zero(m)];
      return residual_lambda(oracle, lambda, uni) - s;
    };
    SfmResult res = sfm_forced(obj, ground());
    ++calls;
    return memo.emplace(lambda, std::move(res)).first->second;
  }

  // Minimizer on a neighbourhood just below lambda0: every rate contributes
  // the affine piece holding there, so ties at lambda0 are broken by slope.
  const SfmResult& left_probe(const Rational& lambda0) {
    if (lambda0 == rates[user].lo) return probe(lambda0);
    auto it = left_memo.find(lambda0);
    if (it != left_memo.end()) return it->second;
    std::vector<AffineFn> rv;
    for (const PiecewiseAffine& r : rates) {
      int k = r.piece_at(lambda0);
      if (r.span(k).start == lambda0 && k > 0) --k;
      rv.push_back(r.vals[k]);
    }
    auto obj = [&](Mask uni, Mask) {
      AffineFn acc{Rational(-1), oracle.value(uni)};
      for (Mask m = uni; m != 0; m &= m - 1)
        acc = acc - rv[std::countr_zero(m)];
      return acc;
    };
    SfmResult res = sfm_left_limit(obj, lambda0, ground());
    ++calls;
    return left_memo.emplace(lambda0, std::move(res)).first->second;
  }
};

// Nested minimizer sets between u_big (active at some smaller threshold)
// and u_small, probed where the two residuals meet. When the probe lands on
// u_small, the pair is adjacent only if the limit from below still yields
// u_big; otherwise the limit set splits the bracket.
std::vector<Mask> kol_rec(Mask u_big, Mask u_small, KolContext& ctx) {
  if (++ctx.depth > 4 * ctx.oracle.size() + 8)
    throw std::logic_error("kolmogorov: chain recursion too deep");
  if (u_big == u_small) return {u_big};
  PiecewiseAffine lhs = sum_rates(ctx.rates, u_big & ~u_small);
  Rational rhs = ctx.oracle.value(u_big) - ctx.oracle.value(u_small);
  auto cross = first_attainment(lhs, rhs, lhs.lo);
  if (!cross) throw std::logic_error("kolmogorov: residuals never meet");
  Mask mid = ctx.probe(*cross).minimal_minimizer;
  if (mid == u_big)
    throw std::logic_error("kolmogorov: probe repeated the upper set");
  if (mid != u_small) {
    if ((mid & ~u_big) || (u_small & ~mid))
      throw std::logic_error("kolmogorov: probe left the bracket");
    auto sets = kol_rec(u_big, mid, ctx);
    auto lower = kol_rec(mid, u_small, ctx);
    sets.insert(sets.end(), lower.begin(), lower.end());
    return sets;
  }
  Mask left = ctx.left_probe(*cross).minimal_minimizer;
  if (left == u_big) return {u_big, u_small};
  if ((left & ~u_big) || (u_small & ~left))
    throw std::logic_error("kolmogorov: left probe left the bracket");
  ++ctx.tie_branches;
  auto sets = kol_rec(u_big, left, ctx);
  auto lower = kol_rec(left, u_small, ctx);
  sets.insert(sets.end(), lower.begin(), lower.end());
  return sets;
}

std::vector<Mask> chain_sets(Mask top, Mask bottom, KolContext& ctx) {
  auto sets = kol_rec(top, bottom, ctx);
  std::sort(sets.begin(), sets.end(), [](Mask a, Mask b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa > pb;
    return a > b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  for (size_t t = 0; t + 1 < sets.size(); ++t)
    if (sets[t + 1] & ~sets[t])
      throw std::logic_error("kolmogorov: chain sets not nested");
  return sets;
}

}  // namespace

PspReport kolmogorov_psp(const SubmodularOracle& o,
                         const std::vector<int>& order, KolTrace* trace) {
  const int n = o.size();
  if (n < 2)
    throw std::invalid_argument("kolmogorov_psp: needs at least two users");
  validate_order(order, n);
  const Rational lambda_hi = o.total() - window_alpha_lo(o);

  SegmentedRateVector rates(
      n, PiecewiseAffine::constant(Rational(0), lambda_hi,
                                   Closure::LowerClosed,
                                   AffineFn{Rational(-1), Rational(0)}));
  Segmented<Partition> sweep = Segmented<Partition>::constant(
      Rational(0), lambda_hi, Closure::LowerClosed,
      Partition::singletons(o.full_mask()));
  long total_calls = 0;

  for (int phi : order) {
    KolContext ctx{o, phi, rates};
    const Mask self = bit(phi);
    Mask top = ctx.probe(Rational(0)).minimal_minimizer;
    std::vector<Mask> chain =
        top == self ? std::vector<Mask>{self} : chain_sets(top, self, ctx);

    std::vector<Rational> criticals;
    for (size_t t = 0; t + 1 < chain.size(); ++t) {
      PiecewiseAffine lhs = sum_rates(rates, chain[t] & ~chain[t + 1]);
      auto x = first_attainment(
          lhs, o.value(chain[t]) - o.value(chain[t + 1]), lhs.lo);
      if (!x) throw std::logic_error("kolmogorov: missing threshold");
      if (!criticals.empty() && !(criticals.back() < *x))
        throw std::logic_error("kolmogorov: thresholds not increasing");
      criticals.push_back(*x);
    }

    Segmented<Mask> chain_seg;
    chain_seg.lo = Rational(0);
    chain_seg.hi = lambda_hi;
    chain_seg.closure = Closure::LowerClosed;
    chain_seg.cuts = criticals;
    chain_seg.vals = chain;
    chain_seg.validate();

    // Newcomer: the active set's residual, assigned outright.
    PiecewiseAffine nr;
    nr.lo = Rational(0);
    nr.hi = lambda_hi;
    nr.closure = Closure::LowerClosed;
    nr.cuts = criticals;
    for (Mask u : chain)
      nr.vals.push_back(AffineFn{Rational(-1), o.value(u)});
    nr.canonicalize();
    rates[phi] = std::move(nr);

    // Users absorbed at a threshold are capped at their value there.
    for (size_t t = 0; t + 1 < chain.size(); ++t)
      for (Mask m = chain[t] & ~chain[t + 1]; m != 0; m &= m - 1) {
        int u = std::countr_zero(m);
        Rational c = piecewise_value(rates[u], criticals[t]);
        rates[u] = pointwise_min(rates[u], AffineFn::constant(std::move(c)));
      }

    auto merged =
        combine(sweep, chain_seg, [](const Partition& p, Mask u) {
          return p.merge_overlapping(u);
        });
    for (int k = 0; k + 1 < merged.pieces(); ++k)
      if (!refines(merged.vals[k + 1], merged.vals[k]))
        throw std::logic_error("kolmogorov: sweep not coarsening");
    sweep = std::move(merged);

    total_calls += ctx.calls;
    if (trace)
      trace->iterations.push_back({phi, std::move(chain), std::move(criticals),
                                   ctx.calls, ctx.tie_branches, rates, sweep});
  }

  // Convert the final threshold sweep back to the sum-rate domain.
  const Rational k = o.total();
  SegmentedRateVector rates_alpha;
  for (const PiecewiseAffine& r : rates)
    rates_alpha.push_back(
        r.flip(k, [&](const AffineFn& f) { return f.flipped(k); }));
  Segmented<Partition> sweep_alpha =
      sweep.flip(k, [](const Partition& p) { return p; });

  Psp psp;
  psp.alpha0 = k;
  psp.critical_points = sweep_alpha.cuts;
  psp.chain = sweep_alpha.vals;
  if (!(psp.chain.back() == Partition::single_block(o.full_mask()))) {
    psp.chain.push_back(Partition::single_block(o.full_mask()));
    psp.critical_points.push_back(k);
    psp.degenerate = true;
  }
  return derive_report(std::move(psp), std::move(rates_alpha),
                       std::move(sweep_alpha), total_calls);
}

}  // namespace psp
