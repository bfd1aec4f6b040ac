#include "psp/distributed.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

namespace psp {

namespace {

// Dense slot of `user` within the prefix (members stored ascending).
int dense_slot(Mask prefix, int user) {
  return popcount(prefix & (bit(user) - 1));
}

Rational rate_value(const SegmentedRateVector& rates, Mask prefix, int user,
                    const Rational& lambda) {
  return piecewise_value(rates[dense_slot(prefix, user)], lambda);
}

Rational mask_rate_value(const SegmentedRateVector& rates, Mask prefix, Mask x,
                         const Rational& lambda) {
  Rational s(0);
  for (Mask rest = x; rest; rest &= rest - 1)
    s += rate_value(rates, prefix, lowest_bit(rest), lambda);
  return s;
}

PiecewiseAffine mask_rate_sum(const SegmentedRateVector& rates, Mask prefix,
                              Mask x) {
  std::optional<PiecewiseAffine> acc;
  for (Mask rest = x; rest; rest &= rest - 1) {
    const PiecewiseAffine& r = rates[dense_slot(prefix, lowest_bit(rest))];
    if (!acc)
      acc = r;
    else
      acc = combine(*acc, r,
                    [](const AffineFn& a, const AffineFn& b) { return a + b; });
  }
  if (!acc) throw std::logic_error("mask_rate_sum: empty selection");
  return *acc;
}

// Shared state of one user's step.
struct DistContext {
  const SubmodularOracle& oracle;
  int user;
  Mask prefix;
  const Segmented<Partition>& ground;
  const SegmentedRateVector& rates;  // pre-update, dense over prefix
  std::map<Rational, SfmResult> memo{};
  long calls = 0;
  long evals = 0;
  int depth = 0;

  const SfmResult& probe(const Rational& lambda) {
    auto it = memo.find(lambda);
    if (it != memo.end()) return it->second;
    const Partition& g = ground.at(lambda);
    FusedGround fused{g, -1};
    for (int b = 0; b < g.size(); ++b)
      if (g.blocks[b] >> user & 1) fused.designated = b;
    if (fused.designated < 0)
      throw std::logic_error("probe: user missing from the fused ground");
    std::vector<Rational> block_rate;
    block_rate.reserve(g.blocks.size());
    for (Mask b : g.blocks)
      block_rate.push_back(mask_rate_value(rates, prefix, b, lambda));
    FusedObjective obj = [&](Mask uni, Mask sel) {
      Rational v = residual_lambda(oracle, lambda, uni);
      for (int b = 0; b < g.size(); ++b)
        if (sel >> b & 1) v -= block_rate[b];
      return v;
    };
    SfmResult res = sfm_forced(obj, fused);
    calls += 1;
    evals += res.probe_count;
    return memo.emplace(lambda, std::move(res)).first->second;
  }

  Rational objective_of(Mask x, const Rational& lambda) const {
    return residual_lambda(oracle, lambda, x) -
           mask_rate_value(rates, prefix, x, lambda);
  }
};

// Bisection on a bracketing pair of nested sets, big down to small. The
// probe threshold equalizes the residuals of the pair after splitting the
// difference along p_decomp; termination needs the residuals to agree at it.
std::vector<Mask> chain_rec(Mask u_big, Mask u_small,
                            const Partition& p_decomp, DistContext& ctx) {
  if (++ctx.depth > 4 * ctx.oracle.size() + 8)
    throw std::logic_error("distr chain: bisection failed to terminate");
  if (u_big == u_small) return {u_big};
  std::vector<Mask> atoms = decompose(u_big & ~u_small, p_decomp);
  Rational lambda = -ctx.oracle.value(u_big) + ctx.oracle.value(u_small);
  for (Mask a : atoms) lambda += ctx.oracle.value(a);
  lambda /= Rational(static_cast<long>(atoms.size()));
  const SfmResult& res = ctx.probe(lambda);
  Mask u_mid = res.minimal_minimizer;
  if (u_mid == u_small &&
      ctx.objective_of(u_big, lambda) == res.min_value)
    return {u_big, u_small};
  std::vector<Mask> high = chain_rec(u_big, u_mid, ctx.ground.at(lambda), ctx);
  std::vector<Mask> low = chain_rec(u_mid, u_small, p_decomp, ctx);
  high.insert(high.end(), low.begin(), low.end());
  return high;
}

// Full nested chain for the step, descending by size from the prefix down
// to the new user's singleton.
std::vector<Mask> chain_sets(DistContext& ctx) {
  std::vector<Mask> sets = chain_rec(ctx.prefix, bit(ctx.user),
                                     Partition::singletons(ctx.prefix), ctx);
  std::sort(sets.begin(), sets.end(), [](Mask a, Mask b) {
    return popcount(a) != popcount(b) ? popcount(a) > popcount(b) : a > b;
  });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  for (size_t t = 0; t + 1 < sets.size(); ++t)
    if (sets[t + 1] & ~sets[t])
      throw std::logic_error("distr chain: minimizer sets not nested");
  return sets;
}

}  // namespace

PrefixState distr_init(const SubmodularOracle& o, int user,
                       const Rational& lambda_hi) {
  if (user < 0 || user >= o.size())
    throw std::invalid_argument("distr_init: user out of range");
  PrefixState s;
  s.prefix = bit(user);
  s.rates_lambda.push_back(PiecewiseAffine::constant(
      Rational(0), lambda_hi, Closure::LowerClosed,
      AffineFn{Rational(-1), o.value(bit(user))}));
  s.partition_lambda = Segmented<Partition>::constant(
      Rational(0), lambda_hi, Closure::LowerClosed,
      Partition::singletons(bit(user)));
  return s;
}

PrefixState distr_extend(const SubmodularOracle& o, const PrefixState& prev,
                         int user, SfmStats* stats) {
  if (user < 0 || user >= o.size())
    throw std::invalid_argument("distr_extend: user out of range");
  if (prev.prefix >> user & 1)
    throw std::invalid_argument("distr_extend: user already in the prefix");
  const Rational lhi = prev.partition_lambda.hi;
  const Mask prefix = prev.prefix | bit(user);
  const int slot = dense_slot(prefix, user);

  SegmentedRateVector rates = prev.rates_lambda;
  rates.insert(rates.begin() + slot,
               PiecewiseAffine::constant(Rational(0), lhi, Closure::LowerClosed,
                                         AffineFn{Rational(-1), Rational(0)}));
  Segmented<Partition> ground = prev.partition_lambda.map(
      [&](const Partition& p) { return p.with_singleton(user); });

  DistContext ctx{o, user, prefix, ground, rates};
  std::vector<Mask> chain = chain_sets(ctx);

  // Crossings between adjacent sets, ascending with the sets shrinking.
  // Each pair's segment starts where the previous one ended, so the search
  // floor advances with the crossings already found; an earlier root of the
  // same equation can exist where a rate dips, but lies outside the segment.
  std::vector<Rational> criticals;
  for (size_t t = 0; t + 1 < chain.size(); ++t) {
    Mask diff = chain[t] & ~chain[t + 1];
    PiecewiseAffine lhs = mask_rate_sum(rates, prefix, diff);
    Rational rhs = o.value(chain[t]) - o.value(chain[t + 1]);
    std::optional<Rational> x = first_equal_nonincreasing(
        lhs, rhs, criticals.empty() ? Rational(0) : criticals.back(), lhi);
    if (!x)
      throw std::logic_error("distr chain: adjacent sets never cross");
    if (!criticals.empty() && !(criticals.back() < *x))
      throw std::logic_error("distr chain: crossings out of order");
    criticals.push_back(std::move(*x));
  }
  // A crossing at threshold zero leaves the biggest set no segment.
  if (!criticals.empty() && criticals.front() == Rational(0)) {
    criticals.erase(criticals.begin());
    chain.erase(chain.begin());
  }

  Segmented<Mask> chain_seg;
  chain_seg.lo = Rational(0);
  chain_seg.hi = lhi;
  chain_seg.closure = Closure::LowerClosed;
  chain_seg.cuts = criticals;
  chain_seg.vals.assign(chain.begin(), chain.end());
  chain_seg.validate();

  // Lift of the new user's rate by the fused residual of the active chain
  // set, against the pre-update rates.
  std::vector<Rational> cuts = criticals;
  for (const PiecewiseAffine& r : rates)
    cuts.insert(cuts.end(), r.cuts.begin(), r.cuts.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  PiecewiseAffine lift;
  lift.lo = Rational(0);
  lift.hi = lhi;
  lift.closure = Closure::LowerClosed;
  lift.cuts = cuts;
  for (size_t k = 0; k <= cuts.size(); ++k) {
    Rational x = k == 0 ? Rational(0) : cuts[k - 1];
    Mask u_set = chain_seg.at(x);
    AffineFn fn{Rational(-1), o.value(u_set)};
    for (Mask rest = u_set; rest; rest &= rest - 1)
      fn = fn - rates[dense_slot(prefix, lowest_bit(rest))].at(x);
    lift.vals.push_back(fn);
  }
  lift.canonicalize();

  PrefixState out;
  out.prefix = prefix;
  out.rates_lambda = std::move(rates);
  out.rates_lambda[slot] =
      combine(out.rates_lambda[slot], lift,
              [](const AffineFn& a, const AffineFn& b) { return a + b; });
  out.partition_lambda =
      combine(ground, chain_seg, [](const Partition& g, Mask u) {
        return g.merge_overlapping(u);
      });
  for (int k = 0; k + 1 < out.partition_lambda.pieces(); ++k)
    if (!refines(out.partition_lambda.vals[k + 1],
                 out.partition_lambda.vals[k]))
      throw std::logic_error("distr: partition sweep not coarsening");
  if (stats) {
    stats->calls += ctx.calls;
    stats->evals += ctx.evals;
  }
  return out;
}

DistrResult distr_par(const SubmodularOracle& o,
                      const std::vector<int>& order) {
  const int n = o.size();
  if (n == 0) throw std::invalid_argument("distr_par: empty ground set");
  validate_order(order, n);
  const Rational lambda_hi = o.total() - window_alpha_lo(o);

  DistrResult out;
  SfmStats stats;
  out.states.push_back(distr_init(o, order[0], lambda_hi));
  for (int i = 1; i < n; ++i) {
    out.messages.push_back({order[i - 1], order[i], out.states.back()});
    out.states.push_back(distr_extend(o, out.states.back(), order[i], &stats));
  }

  // Convert the final threshold sweep back to the sum-rate domain.
  const PrefixState& last = out.states.back();
  const Rational k = o.total();
  SegmentedRateVector rates_alpha;
  for (const PiecewiseAffine& r : last.rates_lambda)
    rates_alpha.push_back(
        r.flip(k, [&](const AffineFn& f) { return f.flipped(k); }));
  Segmented<Partition> sweep_alpha =
      last.partition_lambda.flip(k, [](const Partition& p) { return p; });

  Psp psp;
  psp.alpha0 = k;
  psp.critical_points = sweep_alpha.cuts;
  psp.chain = sweep_alpha.vals;
  if (!(psp.chain.back() == Partition::single_block(o.full_mask()))) {
    psp.chain.push_back(Partition::single_block(o.full_mask()));
    psp.critical_points.push_back(k);
    psp.degenerate = true;
  }
  out.report = derive_report(std::move(psp), std::move(rates_alpha),
                             std::move(sweep_alpha), stats.calls);
  return out;
}

}  // namespace psp
