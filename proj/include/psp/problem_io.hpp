#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psp/distributed.hpp"
#include "psp/oracle.hpp"
#include "psp/psp.hpp"

namespace psp {

// Malformed or semantically invalid problem input.
struct ProblemParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input exceeds a documented size cap.
struct SizeGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A derived rate vector failed its feasibility audit.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemModel { Bits, Gf2, Graph, Table };

// The model tag is kept alongside the oracle: strength is only defined for
// cut functions, and reports echo the model.
struct Problem {
  ProblemModel model;
  std::shared_ptr<SubmodularOracle> oracle;
};

const char* model_name(ProblemModel m);

// Parses the JSON text of a problem document. Exact values only: weights
// and table entries are integers or rational strings, never floats.
Problem parse_problem(const std::string& text);

// Reads and parses a problem file; file-system failures surface as
// ProblemParseError.
Problem load_problem(const std::string& path);

// Flat, string-typed mirror of the JSON report document. All rationals are
// canonical "p" / "p/q" strings, so serialize(parse(serialize(x))) is
// byte-identical to serialize(x).
struct ReportDoc {
  std::string algorithm;
  std::string model;
  std::vector<std::string> users;  // labels in index order
  std::vector<std::string> order;  // labels in processing order
  std::string alpha0;
  bool degenerate = false;
  std::vector<std::string> breakpoints_alpha;   // ascending sum-rate view
  std::vector<std::string> breakpoints_lambda;  // ascending threshold view
  std::vector<std::vector<std::vector<std::string>>> chain;  // finest first
  std::vector<std::vector<std::string>> fundamental_partition;
  std::string r_aco;
  std::string r_nco;
  std::string mmi;
  std::string secret_capacity;
  std::optional<std::string> strength;  // graph model only
  std::vector<std::string> optimal_rate_aco;
  std::vector<std::string> optimal_rate_nco;
  long sfm_call_count = 0;

  bool operator==(const ReportDoc&) const = default;
};

// Blocks as label lists, blocks ordered by lowest member.
std::vector<std::vector<std::string>> partition_labels(const Partition& p,
                                                       const GroundSet& g);

ReportDoc make_report_doc(const PspReport& r, const GroundSet& g,
                          const std::string& algorithm, ProblemModel model,
                          const std::vector<int>& order);

// Canonical JSON text (stable key order, two-space indent, trailing
// newline).
std::string serialize_report(const ReportDoc& doc);

// Strict inverse of serialize_report; rejects unknown keys, missing fields
// and non-canonical rationals.
ReportDoc parse_report(const std::string& text);

// Message log of a distributed run as stable JSON, one entry per hand-off.
std::string serialize_message_log(const DistrResult& d, const GroundSet& g);

}  // namespace psp
