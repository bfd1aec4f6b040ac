#pragma once

#include <optional>
#include <vector>

#include "psp/oracle.hpp"
#include "psp/sfm.hpp"

namespace psp {

struct DilworthResult {
  Rational alpha;
  std::vector<Rational> rate;  // per user; empty for the brute variant
  Partition partition;         // finest minimizing partition
  Rational value;              // minimum over partitions of the residual sum
};

// Aggregate minimization-call statistics, shared across the solvers.
struct SfmStats {
  long calls = 0;
  long evals = 0;
};

// Per-user snapshots of the saturation loop, for inspection in tests.
struct CoordSatCapTrace {
  struct Step {
    int user;
    Mask minimizer;  // minimal minimizer chosen for the update
    std::vector<Rational> rate;
    Partition partition;
  };
  std::vector<Step> steps;
};

// Fixed-alpha rate allocation: processes users in `order`, lifting each new
// user's rate by the minimum of the fused residual objective, and fusing the
// minimizer into the running partition. Returns the final rate vector, the
// finest minimizing partition and the minimum value. alpha must lie in the
// sweep window [window_alpha_lo(o), f(V)].
DilworthResult coord_sat_cap(const SubmodularOracle& o, const Rational& alpha,
                             const std::vector<int>& order,
                             SfmStats* stats = nullptr,
                             CoordSatCapTrace* trace = nullptr);

// Exhaustive minimum of the residual sum over all partitions of the carrier
// (default: the full ground set); partition is the meet of all minimizers,
// i.e. the finest one. No rate vector. Carrier is capped at 10 members.
DilworthResult dilworth_brute(const SubmodularOracle& o, const Rational& alpha,
                              std::optional<Mask> carrier = std::nullopt);

}  // namespace psp
