#pragma once

#include <memory>
#include <optional>
#include <string>

#include "psp/ground_set.hpp"
#include "psp/rational.hpp"
#include "psp/segmented.hpp"

namespace psp {

// Normalized (f(∅)=0) submodular set function given by value queries.
class SubmodularOracle {
 public:
  virtual ~SubmodularOracle() = default;
  virtual const GroundSet& ground() const = 0;
  virtual Rational value(Mask x) const = 0;
  virtual bool monotone() const = 0;

  int size() const { return ground().size(); }
  Mask full_mask() const { return ground().full_mask(); }
  Rational total() const { return value(full_mask()); }
};

// Sweep window [alpha_lo, f(V)] for the sum-rate parameter. Monotone
// functions place every partition crossing inside [0, f(V)]; general ones
// (cut functions in particular) need room below 0, bounded via an exact
// worst-case estimate of the largest threshold breakpoint.
Rational window_alpha_lo(const SubmodularOracle& o);

// Residual forms of f against the sum-rate estimate a (empty set maps to 0).
Rational residual(const SubmodularOracle& o, const Rational& a, Mask x);
Rational partition_value(const SubmodularOracle& o, const Rational& a,
                         const Partition& p);
// Threshold-domain residual f(x) - l for nonempty x.
Rational residual_lambda(const SubmodularOracle& o, const Rational& l, Mask x);
Rational partition_value_lambda(const SubmodularOracle& o, const Rational& l,
                                const Partition& p);

struct SubmodularityViolation {
  Mask base;
  int i, j;  // f(base∪i) + f(base∪j) < f(base∪i∪j) + f(base)
  std::string describe(const GroundSet& g) const;
};

// Exhaustive submodularity check over all (base, i, j); carrier <= 12.
std::optional<SubmodularityViolation> find_submodularity_violation(
    const SubmodularOracle& o);
bool check_submodular(const SubmodularOracle& o);

}  // namespace psp
