#include "psp/segmented.hpp"

#include <bit>

namespace psp {

std::string AffineFn::str() const {
  if (slope == Rational(0)) return intercept.str();
  std::string out;
  if (slope == Rational(-1))
    out = "-x";
  else if (slope == Rational(1))
    out = "x";
  else
    out = slope.str() + "x";
  if (intercept == Rational(0)) return out;
  if (intercept < Rational(0)) return out + intercept.str();
  return out + "+" + intercept.str();
}

namespace {

struct EffectivePiece {
  Rational lo, hi;   // effective closed bounds after window clipping
  bool lo_open, hi_open;
  AffineFn fn;
};

std::vector<EffectivePiece> clip_to_window(const PiecewiseAffine& lhs,
                                           const Rational& wlo,
                                           const Rational& whi) {
  if (wlo < lhs.lo || lhs.hi < whi || whi < wlo)
    throw std::invalid_argument("affine solve: window outside domain");
  std::vector<EffectivePiece> out;
  for (int i = 0; i < lhs.pieces(); ++i) {
    auto s = lhs.span(i);
    if (s.end < wlo || whi < s.start) continue;
    EffectivePiece e;
    e.lo = max(s.start, wlo);
    e.hi = min(s.end, whi);
    if (e.hi < e.lo) continue;
    e.lo_open = s.start_open && e.lo == s.start;
    e.hi_open = s.end_open && e.hi == s.end;
    if (e.lo == e.hi && (e.lo_open || e.hi_open)) continue;
    e.fn = lhs.vals[i];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::optional<Rational> solve_affine(const PiecewiseAffine& lhs,
                                     const Rational& rhs,
                                     const Rational& window_lo,
                                     const Rational& window_hi) {
  auto pieces = clip_to_window(lhs, window_lo, window_hi);
  bool have_prev = false;
  Rational prev_hi_value;
  for (const auto& e : pieces) {
    Rational v_lo = e.fn.value(e.lo), v_hi = e.fn.value(e.hi);
    if (e.fn.slope < Rational(0) || (have_prev && v_lo < prev_hi_value))
      throw std::runtime_error("solve_affine: lhs not nondecreasing");
    prev_hi_value = v_hi;
    have_prev = true;
    if (rhs < v_lo || v_hi < rhs) continue;
    if (e.fn.slope == Rational(0)) {
      // Flat piece exactly at rhs: only a degenerate point is unambiguous.
      if (e.lo < e.hi)
        throw std::runtime_error("solve_affine: flat stretch at target value");
      return e.lo;
    }
    Rational x = (rhs - e.fn.intercept) / e.fn.slope;
    if ((x == e.lo && e.lo_open) || (x == e.hi && e.hi_open)) continue;
    return x;
  }
  return std::nullopt;
}

std::optional<Rational> first_attainment(const PiecewiseAffine& lhs,
                                         const Rational& rhs,
                                         const Rational& from) {
  auto pieces = clip_to_window(lhs, from, lhs.hi);
  for (const auto& e : pieces) {
    if (e.fn.slope == Rational(0)) {
      if (e.fn.intercept != rhs) continue;
      if (e.lo_open) {
        if (e.lo == e.hi) continue;
        // The open start is approached but not attained; the rest of a flat
        // piece still is, yet has no smallest point. This only arises after
        // window clipping and is treated as attained at the clip point.
      }
      return e.lo;
    }
    Rational x = (rhs - e.fn.intercept) / e.fn.slope;
    if (x < e.lo || e.hi < x) continue;
    if ((x == e.lo && e.lo_open) || (x == e.hi && e.hi_open)) continue;
    return x;
  }
  return std::nullopt;
}

PiecewiseAffine sum_rates(const SegmentedRateVector& rates,
                          std::uint32_t users) {
  if (users == 0) throw std::invalid_argument("sum_rates: empty user set");
  PiecewiseAffine acc;
  bool first = true;
  for (std::uint32_t m = users; m != 0; m &= m - 1) {
    int i = static_cast<int>(std::countr_zero(m));
    if (i >= static_cast<int>(rates.size()))
      throw std::invalid_argument("sum_rates: user out of range");
    if (first) {
      acc = rates[i];
      first = false;
    } else {
      acc = combine(acc, rates[i],
                    [](const AffineFn& a, const AffineFn& b) { return a + b; });
    }
  }
  return acc;
}

std::optional<Rational> first_equal_nonincreasing(const PiecewiseAffine& lhs,
                                                  const Rational& rhs,
                                                  const Rational& window_lo,
                                                  const Rational& window_hi) {
  auto pieces = clip_to_window(lhs, window_lo, window_hi);
  bool have_prev = false;
  Rational prev_hi_value;
  for (const auto& e : pieces) {
    Rational v_lo = e.fn.value(e.lo), v_hi = e.fn.value(e.hi);
    if (Rational(0) < e.fn.slope || (have_prev && prev_hi_value < v_lo))
      throw std::runtime_error("first_equal: lhs not nonincreasing");
    prev_hi_value = v_hi;
    have_prev = true;
    if (v_lo < rhs || rhs < v_hi) continue;
    if (e.fn.slope == Rational(0)) {
      if (e.lo_open)
        throw std::runtime_error("first_equal: open flat start");
      return e.lo;
    }
    Rational x = (rhs - e.fn.intercept) / e.fn.slope;
    if ((x == e.lo && e.lo_open) || (x == e.hi && e.hi_open)) continue;
    return x;
  }
  return std::nullopt;
}

PiecewiseAffine pointwise_min(const PiecewiseAffine& f, const AffineFn& g) {
  PiecewiseAffine out;
  out.lo = f.lo;
  out.hi = f.hi;
  out.closure = f.closure;
  std::vector<Rational> cuts = f.cuts;
  for (int i = 0; i < f.pieces(); ++i) {
    AffineFn d = f.vals[i] - g;
    if (d.slope == Rational(0)) continue;
    Rational x = -d.intercept / d.slope;
    auto s = f.span(i);
    if (s.start < x && x < s.end) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  out.cuts = std::move(cuts);
  for (size_t i = 0; i <= out.cuts.size(); ++i) {
    Rational a = i == 0 ? out.lo : out.cuts[i - 1];
    Rational b = i == out.cuts.size() ? out.hi : out.cuts[i];
    // The midpoint avoids the crossing itself, which always sits on a cut.
    Rational t = (a + b) / Rational(2);
    const AffineFn& fv = f.at(t);
    out.vals.push_back(fv.value(t) <= g.value(t) ? fv : g);
  }
  out.canonicalize();
  return out;
}

}  // namespace psp
