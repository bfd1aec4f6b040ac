#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psp/rational.hpp"

namespace psp {

// Affine function of the sweep parameter.
struct AffineFn {
  Rational slope;
  Rational intercept;

  Rational value(const Rational& x) const { return slope * x + intercept; }
  bool operator==(const AffineFn&) const = default;
  std::string str() const;  // e.g. "a-2", "-2a+14", "0"

  static AffineFn constant(Rational c) { return {Rational(0), std::move(c)}; }
  // Substitute x = k - y: the same function expressed in y.
  AffineFn flipped(const Rational& k) const {
    return {-slope, slope * k + intercept};
  }
  AffineFn operator+(const AffineFn& o) const {
    return {slope + o.slope, intercept + o.intercept};
  }
  AffineFn operator-(const AffineFn& o) const {
    return {slope - o.slope, intercept - o.intercept};
  }
};

// Which endpoint of each interior breakpoint belongs to the piece below it.
// UpperClosed: [lo,c0], (c0,c1], ..., (c_last,hi]  — sum-rate sweep form.
// LowerClosed: [lo,c0), [c0,c1), ..., [c_last,hi]  — threshold sweep form.
enum class Closure { UpperClosed, LowerClosed };

// Piecewise-constant map from [lo,hi] to T with explicit breakpoints. A
// degenerate point piece is representable at the closed outer end (cut == lo
// for UpperClosed, cut == hi for LowerClosed).
template <class T>
struct Segmented {
  Rational lo, hi;
  Closure closure = Closure::UpperClosed;
  std::vector<Rational> cuts;  // strictly increasing, within [lo,hi]
  std::vector<T> vals;         // cuts.size() + 1 entries

  static Segmented constant(Rational lo, Rational hi, Closure cl, T v) {
    Segmented s;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    s.closure = cl;
    s.vals.push_back(std::move(v));
    s.validate();
    return s;
  }

  int pieces() const { return static_cast<int>(vals.size()); }

  void validate() const {
    if (vals.size() != cuts.size() + 1)
      throw std::logic_error("Segmented: cuts/vals size mismatch");
    if (hi < lo) throw std::logic_error("Segmented: empty domain");
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
      if (!(cuts[i] < cuts[i + 1]))
        throw std::logic_error("Segmented: cuts not increasing");
    if (!cuts.empty()) {
      // The open end of the outermost piece must keep it nonempty.
      if (closure == Closure::UpperClosed) {
        if (cuts.front() < lo || !(cuts.back() < hi))
          throw std::logic_error("Segmented: cut out of range");
      } else {
        if (!(lo < cuts.front()) || hi < cuts.back())
          throw std::logic_error("Segmented: cut out of range");
      }
    }
  }

  // Piece index covering x.
  int piece_at(const Rational& x) const {
    if (x < lo || hi < x) throw std::out_of_range("Segmented: x outside domain");
    if (closure == Closure::UpperClosed) {
      // x belongs to the first piece whose cut >= x.
      return static_cast<int>(
          std::lower_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
    }
    // LowerClosed: x belongs to the first piece whose cut > x.
    return static_cast<int>(
        std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
  }

  const T& at(const Rational& x) const { return vals[piece_at(x)]; }

  struct PieceSpan {
    Rational start, end;
    bool start_open, end_open;
  };
  PieceSpan span(int i) const {
    PieceSpan s;
    s.start = i == 0 ? lo : cuts[i - 1];
    s.end = i == pieces() - 1 ? hi : cuts[i];
    if (closure == Closure::UpperClosed) {
      s.start_open = i != 0;
      s.end_open = false;
    } else {
      s.start_open = false;
      s.end_open = i != pieces() - 1;
    }
    return s;
  }

  // A point of piece i that is guaranteed to lie inside it: the closed end.
  Rational sample(int i) const {
    auto s = span(i);
    return closure == Closure::UpperClosed ? s.end : s.start;
  }

  // Merge adjacent pieces with equal values.
  void canonicalize() {
    std::vector<Rational> ncuts;
    std::vector<T> nvals;
    nvals.push_back(vals[0]);
    for (size_t i = 0; i < cuts.size(); ++i) {
      if (vals[i + 1] == nvals.back()) continue;
      ncuts.push_back(cuts[i]);
      nvals.push_back(vals[i + 1]);
    }
    cuts = std::move(ncuts);
    vals = std::move(nvals);
  }

  template <class Fn>
  auto map(Fn fn) const {
    using U = decltype(fn(vals[0]));
    Segmented<U> out;
    out.lo = lo;
    out.hi = hi;
    out.closure = closure;
    out.cuts = cuts;
    for (const T& v : vals) out.vals.push_back(fn(v));
    out.canonicalize();
    return out;
  }

  // Re-express over y = k - x, reversing piece order and flipping closure.
  // Values are transformed by fn (e.g. AffineFn::flipped for rates).
  template <class Fn>
  Segmented<T> flip(const Rational& k, Fn fn) const {
    Segmented<T> out;
    out.lo = k - hi;
    out.hi = k - lo;
    out.closure = closure == Closure::UpperClosed ? Closure::LowerClosed
                                                  : Closure::UpperClosed;
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it)
      out.cuts.push_back(k - *it);
    for (auto it = vals.rbegin(); it != vals.rend(); ++it)
      out.vals.push_back(fn(*it));
    out.validate();
    return out;
  }

  bool operator==(const Segmented&) const = default;
};

// Piecewise evaluation over the union of both cut sets.
template <class T, class U, class Fn>
auto combine(const Segmented<T>& a, const Segmented<U>& b, Fn fn) {
  if (a.lo != b.lo || a.hi != b.hi || a.closure != b.closure)
    throw std::logic_error("combine: mismatched domains");
  using R = decltype(fn(a.vals[0], b.vals[0]));
  Segmented<R> out;
  out.lo = a.lo;
  out.hi = a.hi;
  out.closure = a.closure;
  std::vector<Rational> cuts = a.cuts;
  cuts.insert(cuts.end(), b.cuts.begin(), b.cuts.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  out.cuts = std::move(cuts);
  for (size_t i = 0; i <= out.cuts.size(); ++i) {
    Rational x = out.closure == Closure::UpperClosed
                     ? (i == out.cuts.size() ? out.hi : out.cuts[i])
                     : (i == 0 ? out.lo : out.cuts[i - 1]);
    out.vals.push_back(fn(a.at(x), b.at(x)));
  }
  out.canonicalize();
  return out;
}

// Piecewise-affine scalar function of the sweep parameter.
using PiecewiseAffine = Segmented<AffineFn>;

// Evaluates a piecewise-affine segmented function pointwise.
inline Rational piecewise_value(const PiecewiseAffine& f, const Rational& x) {
  return f.at(x).value(x);
}

// Solves lhs(x) = rhs inside [window_lo, window_hi] for a nondecreasing lhs.
// Returns the unique solution, std::nullopt when lhs never attains rhs, and
// throws when lhs is not nondecreasing on the window or the solution set is
// a whole interval.
std::optional<Rational> solve_affine(const PiecewiseAffine& lhs,
                                     const Rational& rhs,
                                     const Rational& window_lo,
                                     const Rational& window_hi);

// First x in the window with lhs(x) = rhs for a nonincreasing lhs; a flat
// stretch at rhs yields its left endpoint. Throws on non-monotone input.
std::optional<Rational> first_equal_nonincreasing(const PiecewiseAffine& lhs,
                                                  const Rational& rhs,
                                                  const Rational& window_lo,
                                                  const Rational& window_hi);

// Smallest x >= from with lhs(x) = rhs, with no monotonicity assumption:
// pieces are scanned left to right and open endpoints are respected, so a
// value only approached at an open end does not count as attained.
std::optional<Rational> first_attainment(const PiecewiseAffine& lhs,
                                         const Rational& rhs,
                                         const Rational& from);

// Pointwise minimum of f and a single affine function, splitting pieces
// where the two graphs cross.
PiecewiseAffine pointwise_min(const PiecewiseAffine& f, const AffineFn& g);

// One piecewise-affine rate per user, all over a common window.
using SegmentedRateVector = std::vector<PiecewiseAffine>;

// Pointwise sum of the rates of the users in the (nonempty) bitmask.
PiecewiseAffine sum_rates(const SegmentedRateVector& rates,
                          std::uint32_t users);

}  // namespace psp
