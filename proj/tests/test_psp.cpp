#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <stdexcept>
#include <vector>

#include "psp/oracles.hpp"
#include "psp/psp.hpp"

using namespace psp;

namespace {

BitAssignmentSource five_user_source() {
  return BitAssignmentSource(
      default_ground(5),
      {{1, 2, 3, 7, 8},
       {4, 5, 7, 8},
       {1, 2, 4, 9},
       {0, 1, 2, 3, 5, 6, 8, 9},
       {0, 1, 2, 5, 8, 9}});
}

BitAssignmentSource two_user_source() {
  return BitAssignmentSource(default_ground(2), {{0}, {0, 1}});
}

// Two users share a bit, the third owns another: the top crossing sits
// exactly at the window top.
BitAssignmentSource triple_source() {
  return BitAssignmentSource(default_ground(3), {{0}, {0}, {1}});
}

BitAssignmentSource duplicate_pair() {
  return BitAssignmentSource(default_ground(2), {{0}, {0}});
}

WeightedGraphCut triangle() {
  return WeightedGraphCut(default_ground(3),
                          {{0, 1, Rational(1)},
                           {0, 2, Rational(1)},
                           {1, 2, Rational(1)}});
}

const std::vector<int> kOrder{3, 4, 1, 2, 0};

PiecewiseAffine make_rate(Rational lo, Rational hi, std::vector<Rational> cuts,
                          std::vector<AffineFn> vals) {
  PiecewiseAffine f;
  f.lo = std::move(lo);
  f.hi = std::move(hi);
  f.closure = Closure::UpperClosed;
  f.cuts = std::move(cuts);
  f.vals = std::move(vals);
  f.validate();
  return f;
}

}  // namespace

TEST_CASE("five user hierarchy and rates") {
  BitAssignmentSource o = five_user_source();
  PspReport rep = par(o, kOrder);

  CHECK(rep.psp.alpha0 == Rational(10));
  CHECK(rep.psp.critical_points ==
        std::vector<Rational>{Rational(4), Rational(6), Rational(13, 2)});
  CHECK(!rep.psp.degenerate);
  REQUIRE(rep.psp.chain.size() == 4);
  CHECK(rep.psp.chain[0].blocks ==
        std::vector<Mask>{0b00001, 0b00010, 0b00100, 0b01000, 0b10000});
  CHECK(rep.psp.chain[1].blocks ==
        std::vector<Mask>{0b00001, 0b00010, 0b00100, 0b11000});
  CHECK(rep.psp.chain[2].blocks == std::vector<Mask>{0b11001, 0b00010, 0b00100});
  CHECK(rep.psp.chain[3].blocks == std::vector<Mask>{0b11111});

  CHECK(rep.r_aco == Rational(13, 2));
  CHECK(rep.r_nco == Rational(7));
  CHECK(rep.mmi == Rational(7, 2));
  CHECK(rep.fundamental_partition == rep.psp.chain[2]);
  CHECK(rep.optimal_rate_aco ==
        std::vector<Rational>{Rational(1), Rational(1, 2), Rational(1, 2),
                              Rational(9, 2), Rational(0)});
  CHECK(rep.optimal_rate_nco ==
        std::vector<Rational>{Rational(0), Rational(1), Rational(1),
                              Rational(5), Rational(0)});
  CHECK(rep.sfm_call_count == 12);

  CHECK(rep.partition_sweep.cuts == rep.psp.critical_points);
  CHECK(rep.partition_sweep.vals == rep.psp.chain);

  REQUIRE(rep.rates.size() == 5);
  CHECK(rep.rates[0] ==
        make_rate(Rational(0), Rational(10),
                  {Rational(6), Rational(13, 2), Rational(7)},
                  {{Rational(1), Rational(-5)},
                   {Rational(0), Rational(1)},
                   {Rational(-2), Rational(14)},
                   {Rational(0), Rational(0)}}));
  CHECK(rep.rates[1] == make_rate(Rational(0), Rational(10), {Rational(8)},
                                  {{Rational(1), Rational(-6)},
                                   {Rational(0), Rational(2)}}));
  CHECK(rep.rates[2] ==
        make_rate(Rational(0), Rational(10), {Rational(7), Rational(8)},
                  {{Rational(1), Rational(-6)},
                   {Rational(-1), Rational(8)},
                   {Rational(0), Rational(0)}}));
  CHECK(rep.rates[3] == make_rate(Rational(0), Rational(10), {},
                                  {{Rational(1), Rational(-2)}}));
  CHECK(rep.rates[4] == make_rate(Rational(0), Rational(10), {Rational(4)},
                                  {{Rational(1), Rational(-4)},
                                   {Rational(0), Rational(0)}}));

  // The rate total is the partition minimum at every level of the sweep.
  for (const Rational& a :
       {Rational(0), Rational(3), Rational(5), Rational(25, 4), Rational(13, 2),
        Rational(7), Rational(9), Rational(10)}) {
    Rational sum(0);
    for (const auto& r : rep.rates) sum += piecewise_value(r, a);
    CHECK(sum == dilworth_brute(o, a).value);
  }
}

TEST_CASE("iteration snapshots") {
  BitAssignmentSource o = five_user_source();
  ParTrace trace;
  PspReport rep = par(o, kOrder, &trace);
  REQUIRE(trace.iterations.size() == 4);

  const auto& it0 = trace.iterations[0];
  CHECK(it0.user == 4);
  CHECK(it0.chain_sets == std::vector<Mask>{0b10000, 0b11000});
  CHECK(it0.criticals == std::vector<Rational>{Rational(4)});
  CHECK(it0.probe_calls == 1);
  CHECK(it0.partition_after.cuts == std::vector<Rational>{Rational(4)});

  const auto& it1 = trace.iterations[1];
  CHECK(it1.user == 1);
  CHECK(it1.chain_sets == std::vector<Mask>{0b00010, 0b11010});
  CHECK(it1.criticals == std::vector<Rational>{Rational(8)});
  CHECK(it1.probe_calls == 3);
  CHECK(it1.rates_after[1] ==
        rep.rates[1]);  // this user's rate is final from its own iteration

  const auto& it2 = trace.iterations[2];
  CHECK(it2.user == 2);
  CHECK(it2.chain_sets == std::vector<Mask>{0b00100, 0b11110});
  CHECK(it2.criticals == std::vector<Rational>{Rational(7)});
  CHECK(it2.probe_calls == 3);
  CHECK(it2.partition_after.cuts ==
        std::vector<Rational>{Rational(4), Rational(7)});

  const auto& it3 = trace.iterations[3];
  CHECK(it3.user == 0);
  CHECK(it3.chain_sets == std::vector<Mask>{0b00001, 0b11001, 0b11111});
  CHECK(it3.criticals == std::vector<Rational>{Rational(6), Rational(13, 2)});
  CHECK(it3.probe_calls == 5);
  CHECK(it3.rates_after == rep.rates);
  CHECK(it3.partition_after.cuts == rep.psp.critical_points);

  for (const auto& it : trace.iterations) {
    // Each distinct probe level certifies an adjacency or discovers a sweep
    // boundary, so the spend stays within twice the boundaries found.
    long found = static_cast<long>(it.partition_after.cuts.size());
    if (!it.criticals.empty() && it.criticals.back() == rep.psp.alpha0)
      found += 1;
    CHECK(it.probe_calls <= 2 * found + 1);
  }
}

TEST_CASE("crossing points of a nested chain") {
  BitAssignmentSource o = five_user_source();
  ParTrace trace;
  par(o, kOrder, &trace);
  // Rates as they stood before the last user's update.
  const SegmentedRateVector& before = trace.iterations[2].rates_after;
  std::vector<Rational> cr =
      critical_points({0b00001, 0b11001, 0b11111}, before, o);
  CHECK(cr == std::vector<Rational>{Rational(6), Rational(13, 2)});

  BitAssignmentSource two = two_user_source();
  SegmentedRateVector flat{
      PiecewiseAffine::constant(Rational(0), Rational(2), Closure::UpperClosed,
                                AffineFn::constant(Rational(5))),
      PiecewiseAffine::constant(Rational(0), Rational(2), Closure::UpperClosed,
                                AffineFn::constant(Rational(0)))};
  CHECK_THROWS_AS(critical_points({0b10, 0b11}, flat, two), std::logic_error);
}

TEST_CASE("degenerate hierarchy top") {
  BitAssignmentSource o = triple_source();
  ParTrace trace;
  PspReport rep = par(o, {0, 1, 2}, &trace);
  CHECK(rep.psp.critical_points ==
        std::vector<Rational>{Rational(1), Rational(2)});
  REQUIRE(rep.psp.chain.size() == 3);
  CHECK(rep.psp.chain[1].blocks == std::vector<Mask>{0b011, 0b100});
  CHECK(rep.psp.chain[2].blocks == std::vector<Mask>{0b111});
  CHECK(rep.psp.degenerate);
  CHECK(rep.r_aco == Rational(2));
  CHECK(rep.r_nco == Rational(2));
  CHECK(rep.mmi == Rational(0));
  // The sweep itself never reaches the single block.
  CHECK(rep.partition_sweep.cuts == std::vector<Rational>{Rational(1)});
  CHECK(rep.partition_sweep.vals.back().blocks ==
        std::vector<Mask>{0b011, 0b100});
  CHECK(rep.optimal_rate_aco ==
        std::vector<Rational>{Rational(1), Rational(0), Rational(1)});

  const auto& last = trace.iterations[1];
  CHECK(last.chain_sets == std::vector<Mask>{0b100, 0b111});
  CHECK(last.criticals == std::vector<Rational>{Rational(2)});  // kept in full
  CHECK(last.probe_calls == 3);
}

TEST_CASE("point minimizer at the window bottom") {
  BitAssignmentSource o = duplicate_pair();
  PspReport rep = par(o, {0, 1});
  CHECK(rep.psp.critical_points == std::vector<Rational>{Rational(0)});
  REQUIRE(rep.psp.chain.size() == 2);
  CHECK(rep.psp.chain[0].blocks == std::vector<Mask>{0b01, 0b10});
  CHECK(rep.psp.chain[1].blocks == std::vector<Mask>{0b11});
  CHECK(!rep.psp.degenerate);  // the finer partition holds only at one point
  CHECK(rep.r_aco == Rational(0));
  CHECK(rep.r_nco == Rational(0));
  CHECK(rep.mmi == Rational(1));
  CHECK(rep.rates[0] == make_rate(Rational(0), Rational(1), {},
                                  {{Rational(1), Rational(0)}}));
  CHECK(rep.rates[1] == make_rate(Rational(0), Rational(1), {Rational(0)},
                                  {{Rational(1), Rational(0)},
                                   {Rational(0), Rational(0)}}));
  CHECK(rep.optimal_rate_aco == std::vector<Rational>{Rational(0), Rational(0)});
}

TEST_CASE("single user") {
  BitAssignmentSource o(default_ground(1), {{0, 1}});
  PspReport rep = par(o, {0});
  CHECK(rep.psp.critical_points.empty());
  REQUIRE(rep.psp.chain.size() == 1);
  CHECK(rep.psp.chain[0].blocks == std::vector<Mask>{0b1});
  CHECK(!rep.psp.degenerate);
  CHECK(rep.r_aco == Rational(0));
  CHECK(rep.r_nco == Rational(0));
  CHECK(rep.mmi == Rational(2));
  CHECK(rep.optimal_rate_aco == std::vector<Rational>{Rational(0)});
  CHECK(rep.sfm_call_count == 0);
}

TEST_CASE("all-zero oracle") {
  BitAssignmentSource o(default_ground(3), {{}, {}, {}});
  PspReport rep = par(o, {0, 1, 2});
  CHECK(rep.psp.critical_points == std::vector<Rational>{Rational(0)});
  REQUIRE(rep.psp.chain.size() == 2);
  CHECK(rep.psp.chain[0].blocks == std::vector<Mask>{0b001, 0b010, 0b100});
  CHECK(rep.psp.chain[1].blocks == std::vector<Mask>{0b111});
  CHECK(rep.psp.degenerate);
  CHECK(rep.r_aco == Rational(0));
  CHECK(rep.mmi == Rational(0));
  CHECK(brute_psp(o) == rep.psp);
  CHECK(brute_psp_sweep(o) == rep.psp);
  CHECK(decomposition_algorithm(o) == rep.psp);
}

TEST_CASE("solvers agree on the fixtures") {
  auto check_all = [](const SubmodularOracle& o) {
    std::vector<int> order(o.size());
    for (int i = 0; i < o.size(); ++i) order[i] = i;
    Psp reference = par(o, order).psp;
    CHECK(decomposition_algorithm(o) == reference);
    CHECK(brute_psp(o) == reference);
    if (o.size() <= 5) CHECK(brute_psp_sweep(o) == reference);
    return reference;
  };
  BitAssignmentSource five = five_user_source();
  Psp ref = check_all(five);
  // Order only affects the inner bookkeeping, never the hierarchy.
  CHECK(par(five, kOrder).psp == ref);
  CHECK(par(five, {4, 3, 2, 1, 0}).psp == ref);
  CHECK(decomposition_algorithm(five, {2, 0, 4, 1, 3}) == ref);

  check_all(two_user_source());
  check_all(triple_source());
  check_all(duplicate_pair());

  WeightedGraphCut tri = triangle();
  Psp tri_ref = check_all(tri);
  CHECK(tri_ref.critical_points == std::vector<Rational>{Rational(-3)});
  CHECK(tri_ref.alpha0 == Rational(0));
  CHECK(!tri_ref.degenerate);
}

TEST_CASE("random sources agree with exhaustive hierarchies") {
  std::mt19937 rng(912871);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> pick_n(3, 5);
  for (int trial = 0; trial < 20; ++trial) {
    int n = pick_n(rng);
    std::vector<std::vector<int>> bits(n);
    for (int u = 0; u < n; ++u)
      for (int b = 0; b < 6; ++b)
        if (coin(rng)) bits[u].push_back(b);
    BitAssignmentSource o(default_ground(n), bits);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    PspReport rep = par(o, order);
    CHECK(rep.psp == brute_psp(o));
    CHECK(rep.mmi == mmi_by_enumeration(o));
    CHECK(check_sw_feasible(o, rep.optimal_rate_aco, rep.r_aco));
    CHECK(check_sw_feasible(o, rep.optimal_rate_nco, rep.r_nco));
  }
}

TEST_CASE("shared information by enumeration") {
  BitAssignmentSource o = five_user_source();
  CHECK(mmi_by_enumeration(o) == Rational(7, 2));
  CHECK(mmi_by_enumeration(triangle()) == Rational(3));
  RestrictedOracle pair(o, 0b11000);
  CHECK(mmi_by_enumeration(pair) == Rational(6));
  RestrictedOracle three(o, 0b11001);
  CHECK(mmi_by_enumeration(three) == Rational(4));
  BitAssignmentSource lone(default_ground(1), {{0}});
  CHECK_THROWS_AS(mmi_by_enumeration(lone), std::invalid_argument);
}

TEST_CASE("rate feasibility check") {
  BitAssignmentSource o = five_user_source();
  PspReport rep = par(o, kOrder);
  CHECK(check_sw_feasible(o, rep.optimal_rate_aco, rep.r_aco));
  std::vector<Rational> zero(5, Rational(0));
  CHECK(!check_sw_feasible(o, zero, Rational(0)));
  CHECK(!check_sw_feasible(o, rep.optimal_rate_aco, Rational(7)));
  CHECK_THROWS_AS(check_sw_feasible(o, {Rational(1)}, Rational(1)),
                  std::invalid_argument);
}

TEST_CASE("weighted processing order") {
  std::vector<Rational> w{Rational(5), Rational(1), Rational(1), Rational(2),
                          Rational(3)};
  CHECK(weighted_ordering(w) == std::vector<int>{1, 2, 3, 4, 0});
  CHECK_THROWS_AS(weighted_ordering({Rational(1), Rational(0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(weighted_ordering({Rational(-1)}), std::invalid_argument);
}
