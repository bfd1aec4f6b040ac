#pragma once

#include <vector>

#include "psp/dilworth.hpp"
#include "psp/oracle.hpp"
#include "psp/psp.hpp"
#include "psp/segmented.hpp"

namespace psp {

// Everything one user hands to its successor: the members seen so far and
// the threshold-domain sweep state over them. Rates are stored densely, one
// slot per prefix member in ascending user index.
struct PrefixState {
  Mask prefix = 0;
  SegmentedRateVector rates_lambda;
  Segmented<Partition> partition_lambda;

  bool operator==(const PrefixState&) const = default;
};

// One hop of the chain protocol.
struct Message {
  int sender;
  int receiver;
  PrefixState payload;
};

struct DistrResult {
  std::vector<PrefixState> states;  // after each user's step, protocol order
  std::vector<Message> messages;    // the n-1 handoffs
  PspReport report;                 // final result in the sum-rate domain
};

// First user's state: its own rate line and the trivial partition, over the
// threshold window [0, lambda_hi] agreed by the protocol.
PrefixState distr_init(const SubmodularOracle& o, int user,
                       const Rational& lambda_hi);

// One user's step: extends the predecessor state by `user`. Only consults
// the oracle on subsets of the extended prefix.
PrefixState distr_extend(const SubmodularOracle& o, const PrefixState& prev,
                         int user, SfmStats* stats = nullptr);

// Runs the whole chain in order and derives the report from the last state.
DistrResult distr_par(const SubmodularOracle& o, const std::vector<int>& order);

}  // namespace psp
