#pragma once

#include <functional>

#include "psp/ground_set.hpp"
#include "psp/rational.hpp"
#include "psp/segmented.hpp"

namespace psp {

// Minimization domain: the blocks of a partition, optionally with one
// designated block that every feasible family must contain.
struct FusedGround {
  Partition blocks;
  int designated = -1;  // index into blocks.blocks; -1 lifts the constraint
};

// Objective over a family of fused blocks. Receives the union of the chosen
// blocks and the selection bitmask over block indices; must be submodular on
// the fused lattice for the minimizer lattice guarantees to hold.
using FusedObjective = std::function<Rational(Mask union_mask, Mask selection)>;

// Affine-in-parameter objective for the left-limit variant: the returned
// function must be the candidate's value on a neighbourhood just below the
// probe point.
using FusedAffineObjective =
    std::function<AffineFn(Mask union_mask, Mask selection)>;

struct SfmResult {
  Rational min_value;
  Mask minimal_minimizer = 0;  // union mask: intersection of all minimizers
  Mask maximal_minimizer = 0;  // union mask: union of all minimizers
  long probe_count = 0;        // objective evaluations
};

// Exact minimum of obj over families that contain blocks[designated].
// Exhaustive over the remaining blocks; ground size capped at 22.
SfmResult sfm_forced(const FusedObjective& obj, const FusedGround& ground);

// Minimizer of the objective family at lambda0 - epsilon for infinitesimal
// epsilon > 0, computed exactly: candidates are ranked lexicographically by
// (value at lambda0, negated slope). min_value is the limit value at lambda0.
SfmResult sfm_left_limit(const FusedAffineObjective& obj,
                         const Rational& lambda0, const FusedGround& ground);

// As sfm_forced without a forced block; the empty family is a candidate.
SfmResult sfm_unconstrained(const FusedObjective& obj,
                            const FusedGround& ground);

}  // namespace psp
