#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psp/dendrogram.hpp"
#include "psp/dilworth.hpp"
#include "psp/distributed.hpp"
#include "psp/kolmogorov.hpp"
#include "psp/problem_io.hpp"
#include "psp/psp.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace psp;

std::vector<int> identity_order(int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  return order;
}

std::vector<int> parse_order_flag(const std::string& flag,
                                  const GroundSet& g) {
  if (flag.empty()) return identity_order(g.size());
  std::vector<int> order;
  std::stringstream ss(flag);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int u = g.index_of(tok);
    if (u < 0) throw ProblemParseError("--order: unknown user " + tok);
    order.push_back(u);
  }
  try {
    validate_order(order, g.size());
  } catch (const std::invalid_argument& e) {
    throw ProblemParseError(std::string("--order: ") + e.what());
  }
  return order;
}

std::vector<Rational> parse_weights_flag(const std::string& flag, int n) {
  std::vector<Rational> weights;
  std::stringstream ss(flag);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto w = Rational::parse(tok);
    if (!w) throw ProblemParseError("--weights: bad rational " + tok);
    if (!(Rational(0) < *w))
      throw ProblemParseError("--weights: weights must be positive");
    weights.push_back(*w);
  }
  if (static_cast<int>(weights.size()) != n)
    throw ProblemParseError("--weights: need one weight per user");
  return weights;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

// Runs the requested solver. The bisection and exhaustive variants produce
// only the hierarchy; their reports borrow the parametric rate sweep after
// an exact agreement check.
PspReport run_algorithm(const std::string& alg, const Problem& problem,
                        const std::vector<int>& order,
                        const std::string& trace_path) {
  const SubmodularOracle& o = *problem.oracle;
  if (!trace_path.empty() && alg != "distr")
    throw ProblemParseError("--trace requires --algorithm distr");
  if (alg == "par") return par(o, order);
  if (alg == "distr") {
    DistrResult d = distr_par(o, order);
    if (!trace_path.empty())
      write_text_file(trace_path,
                      serialize_message_log(d, o.ground()));
    return std::move(d.report);
  }
  if (alg == "kolmogorov") {
    if (o.size() < 2)
      throw SizeGuardError("kolmogorov needs at least two users");
    return kolmogorov_psp(o, order);
  }
  if (alg == "da") {
    SfmStats stats;
    Psp h = decomposition_algorithm(o, order, &stats);
    PspReport base = par(o, order);
    if (!(h == base.psp))
      throw std::logic_error("bisection and parametric hierarchies disagree");
    base.sfm_call_count = stats.calls;
    return base;
  }
  if (alg == "brute") {
    if (o.size() > 10) throw SizeGuardError("brute is capped at 10 users");
    Psp h = brute_psp(o);
    PspReport base = par(o, order);
    if (!(h == base.psp))
      throw std::logic_error("exhaustive and parametric hierarchies disagree");
    return base;
  }
  throw ProblemParseError("unknown algorithm " + alg);
}

void print_pretty(const ReportDoc& doc) {
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + v[i];
    return out;
  };
  auto partition_str = [](const std::vector<std::vector<std::string>>& p) {
    std::string out = "{";
    for (size_t i = 0; i < p.size(); ++i) {
      out += (i ? ",{" : "{");
      for (size_t k = 0; k < p[i].size(); ++k) out += (k ? "," : "") + p[i][k];
      out += "}";
    }
    return out + "}";
  };
  std::cout << "algorithm: " << doc.algorithm << "\n"
            << "model: " << doc.model << "\n"
            << "users: " << join(doc.users) << "\n"
            << "order: " << join(doc.order) << "\n"
            << "breakpoints (sum-rate): " << join(doc.breakpoints_alpha)
            << "\n"
            << "breakpoints (threshold): " << join(doc.breakpoints_lambda)
            << "\n"
            << "hierarchy:\n";
  for (const auto& p : doc.chain)
    std::cout << "  " << partition_str(p) << "\n";
  std::cout << "r_aco: " << doc.r_aco << "\n"
            << "r_nco: " << doc.r_nco << "\n"
            << "fundamental partition: "
            << partition_str(doc.fundamental_partition) << "\n"
            << "shared information: " << doc.mmi << "\n"
            << "secret capacity: " << doc.secret_capacity << "\n";
  if (doc.strength) std::cout << "strength: " << *doc.strength << "\n";
  std::cout << "optimal rate (asymptotic): " << join(doc.optimal_rate_aco)
            << "\n"
            << "optimal rate (integral): " << join(doc.optimal_rate_nco)
            << "\n"
            << "minimization calls: " << doc.sfm_call_count << "\n";
}

int cmd_psp(const std::string& file, const std::string& alg,
            const std::string& order_flag, const std::string& trace_path,
            bool pretty) {
  Problem problem = load_problem(file);
  const GroundSet& g = problem.oracle->ground();
  std::vector<int> order = parse_order_flag(order_flag, g);
  PspReport report = run_algorithm(alg, problem, order, trace_path);
  ReportDoc doc = make_report_doc(report, g, alg, problem.model, order);
  if (pretty)
    print_pretty(doc);
  else
    std::cout << serialize_report(doc);
  return 0;
}

int cmd_omniscience(const std::string& file, const std::string& objective,
                    const std::string& weights_flag) {
  Problem problem = load_problem(file);
  const SubmodularOracle& o = *problem.oracle;
  const GroundSet& g = o.ground();
  if (objective != "asymptotic" && objective != "integral")
    throw ProblemParseError("--model: expected asymptotic or integral");

  std::vector<int> order = identity_order(o.size());
  std::vector<Rational> weights;
  if (!weights_flag.empty()) {
    weights = parse_weights_flag(weights_flag, o.size());
    order = weighted_ordering(weights);
  }
  PspReport report = par(o, order);
  const bool integral = objective == "integral";
  const Rational& sum = integral ? report.r_nco : report.r_aco;
  const std::vector<Rational>& rate =
      integral ? report.optimal_rate_nco : report.optimal_rate_aco;
  if (!check_sw_feasible(o, rate, sum))
    throw InfeasibleError("derived rate vector fails a coverage constraint");

  json out;
  out["schema"] = 1;
  out["objective"] = objective;
  out["order"] = json::array();
  for (int u : order) out["order"].push_back(g.labels[u]);
  if (!weights.empty()) {
    out["weights"] = json::array();
    for (const Rational& w : weights) out["weights"].push_back(w.str());
  }
  out["sum_rate"] = sum.str();
  out["rate"] = json::array();
  for (const Rational& v : rate) out["rate"].push_back(v.str());
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_strength(const std::string& file) {
  Problem problem = load_problem(file);
  if (problem.model != ProblemModel::Graph)
    throw ProblemParseError("strength requires the graph model");
  const SubmodularOracle& o = *problem.oracle;
  PspReport report = par(o, identity_order(o.size()));
  json out;
  out["schema"] = 1;
  out["strength"] = (report.mmi / Rational(2)).str();
  out["attack_partition"] =
      partition_labels(report.fundamental_partition, o.ground());
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_cluster(const std::string& file, const std::string& format) {
  if (format != "json" && format != "dot" && format != "newick")
    throw ProblemParseError("--format: expected json, dot or newick");
  Problem problem = load_problem(file);
  const SubmodularOracle& o = *problem.oracle;
  PspReport report = par(o, identity_order(o.size()));
  Dendrogram d = build_dendrogram(report.psp);
  if (format == "json")
    std::cout << dendrogram_json(d, o.ground());
  else if (format == "dot")
    std::cout << dendrogram_dot(d, o.ground());
  else
    std::cout << dendrogram_newick(d, o.ground());
  return 0;
}

int cmd_validate(const std::string& file) {
  Problem problem = load_problem(file);
  const SubmodularOracle& o = *problem.oracle;
  const int n = o.size();
  if (n > 8) throw SizeGuardError("validate is capped at 8 users");

  std::vector<int> order = identity_order(n);
  PspReport base = par(o, order);
  std::vector<std::pair<std::string, std::string>> failures;
  auto check = [&](const std::string& name, bool ok,
                   const std::string& detail) {
    if (!ok) failures.emplace_back(name, detail);
  };
  long checks_run = 0;
  auto run = [&](const std::string& name, auto fn) {
    ++checks_run;
    try {
      fn();
    } catch (const std::exception& e) {
      check(name, false, e.what());
    }
  };

  run("bisection_hierarchy", [&] {
    check("bisection_hierarchy", decomposition_algorithm(o, order) == base.psp,
          "hierarchy differs from the parametric sweep");
  });
  run("message_passing_hierarchy", [&] {
    check("message_passing_hierarchy",
          distr_par(o, order).report.psp == base.psp,
          "hierarchy differs from the parametric sweep");
  });
  if (n >= 2)
    run("face_value_hierarchy", [&] {
      check("face_value_hierarchy", kolmogorov_psp(o, order).psp == base.psp,
            "hierarchy differs from the parametric sweep");
    });
  run("exhaustive_hierarchy", [&] {
    check("exhaustive_hierarchy", brute_psp(o) == base.psp,
          "hierarchy differs from the parametric sweep");
  });
  if (n <= 5)
    run("candidate_sweep_hierarchy", [&] {
      check("candidate_sweep_hierarchy", brute_psp_sweep(o) == base.psp,
            "hierarchy differs from the parametric sweep");
    });

  run("truncation_probes", [&] {
    std::mt19937 rng(11);
    const Rational wlo = window_alpha_lo(o);
    for (int k = 0; k < 10; ++k) {
      Rational alpha =
          wlo + (o.total() - wlo) * Rational(rng() % 65, 64);
      if (o.total() < alpha) alpha = o.total();
      DilworthResult fast = coord_sat_cap(o, alpha, order);
      DilworthResult slow = dilworth_brute(o, alpha);
      check("truncation_probes", fast.value == slow.value,
            "saturation value differs from enumeration at " + alpha.str());
      Rational sum(0);
      for (const PiecewiseAffine& r : base.rates)
        sum += piecewise_value(r, alpha);
      check("truncation_probes", sum == slow.value,
            "rate sum differs from the truncation at " + alpha.str());
    }
  });
  run("rate_feasibility", [&] {
    check("rate_feasibility",
          check_sw_feasible(o, base.optimal_rate_aco, base.r_aco),
          "asymptotic rate fails a coverage constraint");
    check("rate_feasibility",
          check_sw_feasible(o, base.optimal_rate_nco, base.r_nco),
          "integral rate fails a coverage constraint");
  });
  if (n >= 2)
    run("duality_enumeration", [&] {
      check("duality_enumeration", base.mmi == mmi_by_enumeration(o),
            "shared information differs from partition enumeration");
    });
  run("coarsening_chain", [&] {
    for (size_t t = 0; t + 1 < base.psp.chain.size(); ++t)
      check("coarsening_chain",
            refines(base.psp.chain[t], base.psp.chain[t + 1]),
            "hierarchy is not a coarsening chain");
  });

  json out;
  out["schema"] = 1;
  out["checks_run"] = checks_run;
  out["failures"] = json::array();
  for (const auto& [name, detail] : failures)
    out["failures"].push_back({{"name", name}, {"detail", detail}});
  if (!failures.empty())
    out["first_divergence"] =
        json{{"name", failures[0].first}, {"detail", failures[0].second}};
  out["status"] = failures.empty() ? "pass" : "fail";
  std::cout << out.dump(2) << "\n";
  return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact partition hierarchies of submodular functions"};
  app.require_subcommand(1);

  std::string file, algorithm = "par", order_flag, trace_path;
  std::string objective = "asymptotic", weights_flag, format = "json";
  bool pretty = false, json_mode = false;

  CLI::App* c_psp =
      app.add_subcommand("psp", "hierarchy, rates and derived quantities");
  c_psp->add_option("file", file, "problem JSON file")->required();
  c_psp->add_option("--algorithm", algorithm,
                    "par|da|kolmogorov|distr|brute");
  c_psp->add_option("--order", order_flag, "comma-separated user labels");
  c_psp->add_option("--trace", trace_path,
                    "write the hand-off log of a distr run to this file");
  c_psp->add_flag("--pretty", pretty, "human-readable output");
  c_psp->add_flag("--json", json_mode, "JSON output (default)");

  CLI::App* c_omni =
      app.add_subcommand("omniscience", "minimum sum-rate and a rate vector");
  c_omni->add_option("file", file, "problem JSON file")->required();
  c_omni->add_option("--model", objective, "asymptotic|integral");
  c_omni->add_option("--weights", weights_flag,
                     "comma-separated positive weights");

  CLI::App* c_strength =
      app.add_subcommand("strength", "graph strength and attack partition");
  c_strength->add_option("file", file, "graph problem JSON file")->required();

  CLI::App* c_cluster =
      app.add_subcommand("cluster", "hierarchical clustering dendrogram");
  c_cluster->add_option("file", file, "problem JSON file")->required();
  c_cluster->add_option("--format", format, "json|dot|newick");

  CLI::App* c_validate = app.add_subcommand(
      "validate", "cross-check all solvers and invariants on one instance");
  c_validate->add_option("file", file, "problem JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_psp->parsed()) {
      if (pretty && json_mode)
        throw ProblemParseError("--pretty and --json are exclusive");
      return cmd_psp(file, algorithm, order_flag, trace_path, pretty);
    }
    if (c_omni->parsed()) return cmd_omniscience(file, objective, weights_flag);
    if (c_strength->parsed()) return cmd_strength(file);
    if (c_cluster->parsed()) return cmd_cluster(file, format);
    if (c_validate->parsed()) return cmd_validate(file);
    return 2;
  } catch (const SizeGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ProblemParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
