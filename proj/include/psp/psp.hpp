#pragma once

#include <map>
#include <vector>

#include "psp/dilworth.hpp"
#include "psp/oracle.hpp"
#include "psp/segmented.hpp"
#include "psp/sfm.hpp"

namespace psp {

// The full partition hierarchy of an oracle: strictly coarsening partitions
// with the sum-rate values at which they change.
struct Psp {
  std::vector<Rational> critical_points;  // ascending, in [wlo, f(V)]
  Rational alpha0;                        // f(V)
  std::vector<Partition> chain;           // finest first, ends with {V}
  bool degenerate = false;  // top critical equals f(V): the single-block
                            // partition is never optimal below it

  bool operator==(const Psp&) const = default;
};

// Everything the solvers report about one instance.
struct PspReport {
  Psp psp;
  SegmentedRateVector rates;  // per user over [wlo, f(V)], sum-rate domain
  Segmented<Partition> partition_sweep;  // finest minimizer per sum-rate
  Rational r_aco;                        // minimum asymptotic sum-rate
  Rational r_nco;                        // minimum integral sum-rate
  Partition fundamental_partition;
  Rational mmi;  // shared information: f(V) - r_aco
  std::vector<Rational> optimal_rate_aco;
  std::vector<Rational> optimal_rate_nco;
  long sfm_call_count = 0;
};

// Mutable state of one parametric iteration, shared by the solver and the
// chain-finding recursion.
struct IterationContext {
  const SubmodularOracle& oracle;
  int user;                       // the user being added
  Mask prefix;                    // members processed so far, including user
  Segmented<Partition> ground;    // fused ground per sum-rate
  const SegmentedRateVector& rates;  // rates before this iteration's update
  std::map<Rational, SfmResult> probe_memo{};
  long sfm_calls = 0;
  long sfm_evals = 0;
  std::vector<std::pair<Rational, SfmResult>> probe_log{};  // in probe order
  int depth = 0;

  // Minimal minimizer of the fused residual objective at alpha (memoized).
  const SfmResult& probe(const Rational& alpha);
};

// Per-iteration record for inspection in tests.
struct ParTrace {
  struct Iteration {
    int user;
    std::vector<Mask> chain_sets;       // ascending by size, top set kept
                                        // even when its segment is empty
    std::vector<Rational> criticals;    // crossings, may end at the window top
    SegmentedRateVector rates_after;    // all users, full window
    Segmented<Partition> partition_after;
    long probe_calls;                   // distinct probes this iteration
  };
  std::vector<Iteration> iterations;
};

// Parametric solver: one sweep over the sum-rate window per added user.
PspReport par(const SubmodularOracle& o, const std::vector<int>& order,
              ParTrace* trace = nullptr);

// Nested minimizer sets of the current iteration between the bracketing
// partitions p_down (finer, holding near the window bottom) and p_up
// (coarser, holding near the top), found by probing at partition-pair
// crossings. Returns the sets ascending by size, including the singleton
// of the new user and the full prefix.
std::vector<Mask> str_map(const Partition& p_down, const Partition& p_up,
                          IterationContext& ctx);

// Crossing points between adjacent sets of a nested chain: for each pair
// the sum rate at which the larger set's objective catches up with the
// smaller's. Strictly increasing; throws when crossings coincide.
std::vector<Rational> critical_points(const std::vector<Mask>& chain,
                                      const SegmentedRateVector& rates,
                                      const SubmodularOracle& o);

// Hierarchy by recursive bisection of (partition, level) pairs, probing the
// fixed-alpha solver at partition-pair crossings. Order only steers the
// inner solver; the result is order-invariant.
Psp decomposition_algorithm(const SubmodularOracle& o,
                            std::vector<int> order = {},
                            SfmStats* stats = nullptr);

// Processing order minimizing the weighted rate sum: ascending weight,
// ties by user index. Weights must be positive.
std::vector<int> weighted_ordering(const std::vector<Rational>& weights);

// Fills in the derived quantities from the hierarchy and the rate sweep.
PspReport derive_report(Psp psp, SegmentedRateVector rates,
                        Segmented<Partition> partition_sweep,
                        long sfm_call_count);

// Hierarchy via recursive bisection with exhaustively enumerated partition
// minima; independent of the saturation solver. Capped at 10 users.
Psp brute_psp(const SubmodularOracle& o);

// Hierarchy via the all-pairs candidate sweep: every crossing of two
// partition value lines is probed exhaustively. Capped at 5 users.
Psp brute_psp_sweep(const SubmodularOracle& o);

// Shared information by direct enumeration over partitions with at least
// two blocks. Capped at 10 users.
Rational mmi_by_enumeration(const SubmodularOracle& o);

// Checks that `rate` with total `sum` covers every conditional-entropy
// constraint; exhaustive up to 15 users, sampled above.
bool check_sw_feasible(const SubmodularOracle& o,
                       const std::vector<Rational>& rate, const Rational& sum);

}  // namespace psp
