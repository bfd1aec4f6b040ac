#pragma once

#include <vector>

#include "psp/oracle.hpp"
#include "psp/psp.hpp"
#include "psp/segmented.hpp"

namespace psp {

// Per-iteration record of the threshold-domain sweep that keeps every
// user's rate over the whole window and never restricts the ground set:
// each chain search minimizes over all sets containing the newcomer, with
// the other users' current rates charged at face value.
struct KolTrace {
  struct Iteration {
    int user;
    std::vector<Mask> chain;          // descending by size, ends at {user}
    std::vector<Rational> criticals;  // ascending thresholds between sets
    long probes = 0;                  // minimizations, left limits included
    long tie_branches = 0;            // splits forced by a left-limit mismatch
    SegmentedRateVector rates_lambda;
    Segmented<Partition> partition_lambda;
  };
  std::vector<Iteration> iterations;
};

// Runs the sweep over the users in `order` (at least two) and derives the
// same report as par(). The newcomer's rate is assigned outright from the
// active set's residual; users absorbed at a threshold are capped at their
// value there by a pointwise min.
PspReport kolmogorov_psp(const SubmodularOracle& o,
                         const std::vector<int>& order,
                         KolTrace* trace = nullptr);

}  // namespace psp
