#include "psp/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "psp/oracles.hpp"

namespace psp {

namespace {

using json = nlohmann::ordered_json;

Rational exact_value(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_string()) {
    auto r = Rational::parse(v.get<std::string>());
    if (r) return *r;
  }
  throw ProblemParseError(what + ": expected an integer or rational string");
}

std::vector<std::string> parse_users(const json& j) {
  if (!j.contains("users") || !j["users"].is_array())
    throw ProblemParseError("users: expected an array of labels");
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const json& u : j["users"]) {
    if (!u.is_string() || u.get<std::string>().empty())
      throw ProblemParseError("users: labels must be nonempty strings");
    if (!seen.insert(u.get<std::string>()).second)
      throw ProblemParseError("users: duplicate label " + u.get<std::string>());
    labels.push_back(u.get<std::string>());
  }
  if (labels.empty()) throw ProblemParseError("users: at least one required");
  if (static_cast<int>(labels.size()) > kMaxUsers)
    throw SizeGuardError("users: more than 22 users");
  return labels;
}

const json& payload_object(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object())
    throw ProblemParseError(std::string(key) + ": expected an object");
  return j[key];
}

std::shared_ptr<SubmodularOracle> parse_bits(const json& payload,
                                             GroundSet g) {
  std::map<std::string, int> ids;
  std::vector<std::vector<int>> bits(g.size());
  for (const auto& [key, val] : payload.items()) {
    int u = g.index_of(key);
    if (u < 0) throw ProblemParseError("bits: unknown user " + key);
    if (!val.is_array())
      throw ProblemParseError("bits: expected an array for user " + key);
    for (const json& b : val) {
      if (!b.is_string())
        throw ProblemParseError("bits: bit labels must be strings");
      auto [it, fresh] =
          ids.emplace(b.get<std::string>(), static_cast<int>(ids.size()));
      if (fresh && it->second >= BitAssignmentSource::kMaxBits)
        throw SizeGuardError("bits: more than 256 distinct bits");
      bits[u].push_back(it->second);
    }
  }
  for (int u = 0; u < g.size(); ++u)
    if (!payload.contains(g.labels[u]))
      throw ProblemParseError("bits: missing user " + g.labels[u]);
  return std::make_shared<BitAssignmentSource>(std::move(g), std::move(bits));
}

std::shared_ptr<SubmodularOracle> parse_gf2(const json& payload, GroundSet g) {
  std::vector<std::vector<std::uint64_t>> rows(g.size());
  int cols = -1;
  for (const auto& [key, val] : payload.items()) {
    int u = g.index_of(key);
    if (u < 0) throw ProblemParseError("gf2: unknown user " + key);
    if (!val.is_array())
      throw ProblemParseError("gf2: expected an array for user " + key);
    for (const json& r : val) {
      if (!r.is_string())
        throw ProblemParseError("gf2: rows must be 0/1 strings");
      const std::string s = r.get<std::string>();
      if (cols < 0) cols = static_cast<int>(s.size());
      if (static_cast<int>(s.size()) != cols)
        throw ProblemParseError("gf2: rows must all have the same length");
      if (cols > MatrixSourceGF2::kMaxCols)
        throw SizeGuardError("gf2: more than 64 columns");
      std::uint64_t row = 0;
      for (int k = 0; k < cols; ++k) {
        if (s[k] == '1')
          row |= std::uint64_t{1} << k;  // leftmost char is column 0
        else if (s[k] != '0')
          throw ProblemParseError("gf2: rows must be 0/1 strings");
      }
      rows[u].push_back(row);
    }
  }
  for (int u = 0; u < g.size(); ++u)
    if (!payload.contains(g.labels[u]))
      throw ProblemParseError("gf2: missing user " + g.labels[u]);
  return std::make_shared<MatrixSourceGF2>(std::move(g), std::move(rows),
                                           cols < 0 ? 0 : cols);
}

std::shared_ptr<SubmodularOracle> parse_graph(const json& payload,
                                              GroundSet g) {
  if (!payload.contains("edges") || !payload["edges"].is_array())
    throw ProblemParseError("graph: expected an edges array");
  std::vector<WeightedGraphCut::Edge> edges;
  for (const json& e : payload["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() ||
        !e[1].is_string())
      throw ProblemParseError("graph: edges are [user, user, weight]");
    int u = g.index_of(e[0].get<std::string>());
    int v = g.index_of(e[1].get<std::string>());
    if (u < 0 || v < 0)
      throw ProblemParseError("graph: unknown endpoint in edge");
    if (u == v) throw ProblemParseError("graph: self-loops not allowed");
    Rational w = exact_value(e[2], "graph: edge weight");
    if (!(Rational(0) < w))
      throw ProblemParseError("graph: edge weights must be positive");
    edges.push_back({u, v, std::move(w)});
  }
  return std::make_shared<WeightedGraphCut>(std::move(g), std::move(edges));
}

std::string subset_key(Mask x, const GroundSet& g) {
  std::string out;
  for (Mask m = x; m != 0; m &= m - 1) {
    if (!out.empty()) out += ",";
    out += g.labels[lowest_bit(m)];
  }
  return out;
}

std::shared_ptr<SubmodularOracle> parse_table(const json& payload,
                                              GroundSet g) {
  if (g.size() > TableOracle::kMaxTableUsers)
    throw SizeGuardError("table: more than 12 users");
  std::vector<Rational> values(std::size_t{1} << g.size());
  std::vector<char> present(values.size(), 0);
  for (const auto& [key, val] : payload.items()) {
    Mask x = 0;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      int u = g.index_of(tok);
      if (u < 0)
        throw ProblemParseError("table: unknown user " + tok + " in key " +
                                key);
      if (x & bit(u))
        throw ProblemParseError("table: repeated user in key " + key);
      x |= bit(u);
    }
    if (x == 0) throw ProblemParseError("table: empty subset key");
    if (present[x])
      throw ProblemParseError("table: duplicate subset " + subset_key(x, g));
    present[x] = 1;
    values[x] = exact_value(val, "table: value of " + key);
  }
  for (Mask x = 1; x < values.size(); ++x)
    if (!present[x])
      throw ProblemParseError("table: missing subset " + subset_key(x, g));
  try {
    return std::make_shared<TableOracle>(std::move(g), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ProblemParseError(e.what());
  }
}

void check_known_keys(const json& j, const std::set<std::string>& allowed,
                      const char* where) {
  for (const auto& [key, val] : j.items())
    if (!allowed.count(key))
      throw ProblemParseError(std::string(where) + ": unknown key " + key);
}

std::string canonical_rational(const json& v, const std::string& what) {
  if (v.is_string()) {
    auto r = Rational::parse(v.get<std::string>());
    if (r && r->str() == v.get<std::string>()) return v.get<std::string>();
  }
  throw ProblemParseError(what + ": expected a canonical rational string");
}

std::vector<std::string> string_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw ProblemParseError(what + ": expected an array");
  std::vector<std::string> out;
  for (const json& e : v) {
    if (!e.is_string()) throw ProblemParseError(what + ": expected strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::string> rational_list(const json& v,
                                       const std::string& what) {
  if (!v.is_array()) throw ProblemParseError(what + ": expected an array");
  std::vector<std::string> out;
  for (const json& e : v) out.push_back(canonical_rational(e, what));
  return out;
}

std::vector<std::vector<std::string>> blocks_field(const json& v,
                                                   const std::string& what) {
  if (!v.is_array()) throw ProblemParseError(what + ": expected an array");
  std::vector<std::vector<std::string>> out;
  for (const json& b : v) out.push_back(string_list(b, what + " block"));
  return out;
}

}  // namespace

const char* model_name(ProblemModel m) {
  switch (m) {
    case ProblemModel::Bits: return "bits";
    case ProblemModel::Gf2: return "gf2";
    case ProblemModel::Graph: return "graph";
    case ProblemModel::Table: return "table";
  }
  return "?";
}

Problem parse_problem(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ProblemParseError("problem: not a JSON object");
  if (!j.contains("schema") || j["schema"] != 1)
    throw ProblemParseError("problem: missing or unsupported schema");
  if (!j.contains("model") || !j["model"].is_string())
    throw ProblemParseError("problem: missing model");
  const std::string model = j["model"].get<std::string>();
  GroundSet g{parse_users(j)};
  check_known_keys(j, {"schema", "model", "users", model}, "problem");
  if (model == "bits")
    return {ProblemModel::Bits, parse_bits(payload_object(j, "bits"), g)};
  if (model == "gf2")
    return {ProblemModel::Gf2, parse_gf2(payload_object(j, "gf2"), g)};
  if (model == "graph")
    return {ProblemModel::Graph, parse_graph(payload_object(j, "graph"), g)};
  if (model == "table")
    return {ProblemModel::Table, parse_table(payload_object(j, "table"), g)};
  throw ProblemParseError("problem: unknown model " + model);
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::vector<std::vector<std::string>> partition_labels(const Partition& p,
                                                       const GroundSet& g) {
  std::vector<std::vector<std::string>> out;
  for (Mask b : p.blocks) {
    std::vector<std::string> block;
    for (Mask m = b; m != 0; m &= m - 1)
      block.push_back(g.labels[lowest_bit(m)]);
    out.push_back(std::move(block));
  }
  return out;
}

ReportDoc make_report_doc(const PspReport& r, const GroundSet& g,
                          const std::string& algorithm, ProblemModel model,
                          const std::vector<int>& order) {
  ReportDoc doc;
  doc.algorithm = algorithm;
  doc.model = model_name(model);
  doc.users = g.labels;
  for (int u : order) doc.order.push_back(g.labels[u]);
  doc.alpha0 = r.psp.alpha0.str();
  doc.degenerate = r.psp.degenerate;
  for (const Rational& a : r.psp.critical_points)
    doc.breakpoints_alpha.push_back(a.str());
  for (auto it = r.psp.critical_points.rbegin();
       it != r.psp.critical_points.rend(); ++it)
    doc.breakpoints_lambda.push_back((r.psp.alpha0 - *it).str());
  for (const Partition& p : r.psp.chain)
    doc.chain.push_back(partition_labels(p, g));
  doc.fundamental_partition = partition_labels(r.fundamental_partition, g);
  doc.r_aco = r.r_aco.str();
  doc.r_nco = r.r_nco.str();
  doc.mmi = r.mmi.str();
  doc.secret_capacity = r.mmi.str();
  if (model == ProblemModel::Graph)
    doc.strength = (r.mmi / Rational(2)).str();
  for (const Rational& v : r.optimal_rate_aco)
    doc.optimal_rate_aco.push_back(v.str());
  for (const Rational& v : r.optimal_rate_nco)
    doc.optimal_rate_nco.push_back(v.str());
  doc.sfm_call_count = r.sfm_call_count;
  return doc;
}

std::string serialize_report(const ReportDoc& doc) {
  json j;
  j["schema"] = 1;
  j["algorithm"] = doc.algorithm;
  j["model"] = doc.model;
  j["users"] = doc.users;
  j["order"] = doc.order;
  j["alpha0"] = doc.alpha0;
  j["degenerate"] = doc.degenerate;
  j["breakpoints_alpha"] = doc.breakpoints_alpha;
  j["breakpoints_lambda"] = doc.breakpoints_lambda;
  j["chain"] = doc.chain;
  j["fundamental_partition"] = doc.fundamental_partition;
  j["r_aco"] = doc.r_aco;
  j["r_nco"] = doc.r_nco;
  j["mmi"] = doc.mmi;
  j["secret_capacity"] = doc.secret_capacity;
  if (doc.strength) j["strength"] = *doc.strength;
  j["optimal_rate_aco"] = doc.optimal_rate_aco;
  j["optimal_rate_nco"] = doc.optimal_rate_nco;
  j["sfm_call_count"] = doc.sfm_call_count;
  return j.dump(2) + "\n";
}

ReportDoc parse_report(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ProblemParseError("report: not a JSON object");
  check_known_keys(j,
                   {"schema", "algorithm", "model", "users", "order", "alpha0",
                    "degenerate", "breakpoints_alpha", "breakpoints_lambda",
                    "chain", "fundamental_partition", "r_aco", "r_nco", "mmi",
                    "secret_capacity", "strength", "optimal_rate_aco",
                    "optimal_rate_nco", "sfm_call_count"},
                   "report");
  for (const char* key :
       {"schema", "algorithm", "model", "users", "order", "alpha0",
        "degenerate", "breakpoints_alpha", "breakpoints_lambda", "chain",
        "fundamental_partition", "r_aco", "r_nco", "mmi", "secret_capacity",
        "optimal_rate_aco", "optimal_rate_nco", "sfm_call_count"})
    if (!j.contains(key))
      throw ProblemParseError(std::string("report: missing ") + key);
  if (j["schema"] != 1)
    throw ProblemParseError("report: unsupported schema");
  if (!j["algorithm"].is_string() || !j["model"].is_string())
    throw ProblemParseError("report: algorithm and model must be strings");
  if (!j["degenerate"].is_boolean())
    throw ProblemParseError("report: degenerate must be a boolean");
  if (!j["sfm_call_count"].is_number_integer())
    throw ProblemParseError("report: sfm_call_count must be an integer");

  ReportDoc doc;
  doc.algorithm = j["algorithm"].get<std::string>();
  doc.model = j["model"].get<std::string>();
  doc.users = string_list(j["users"], "report users");
  doc.order = string_list(j["order"], "report order");
  doc.alpha0 = canonical_rational(j["alpha0"], "report alpha0");
  doc.degenerate = j["degenerate"].get<bool>();
  doc.breakpoints_alpha =
      rational_list(j["breakpoints_alpha"], "report breakpoints_alpha");
  doc.breakpoints_lambda =
      rational_list(j["breakpoints_lambda"], "report breakpoints_lambda");
  if (!j["chain"].is_array())
    throw ProblemParseError("report chain: expected an array");
  for (const json& p : j["chain"])
    doc.chain.push_back(blocks_field(p, "report chain"));
  doc.fundamental_partition =
      blocks_field(j["fundamental_partition"], "report fundamental");
  doc.r_aco = canonical_rational(j["r_aco"], "report r_aco");
  doc.r_nco = canonical_rational(j["r_nco"], "report r_nco");
  doc.mmi = canonical_rational(j["mmi"], "report mmi");
  doc.secret_capacity =
      canonical_rational(j["secret_capacity"], "report secret_capacity");
  if (j.contains("strength"))
    doc.strength = canonical_rational(j["strength"], "report strength");
  doc.optimal_rate_aco =
      rational_list(j["optimal_rate_aco"], "report optimal_rate_aco");
  doc.optimal_rate_nco =
      rational_list(j["optimal_rate_nco"], "report optimal_rate_nco");
  doc.sfm_call_count = j["sfm_call_count"].get<long>();
  return doc;
}

std::string serialize_message_log(const DistrResult& d, const GroundSet& g) {
  json out;
  out["schema"] = 1;
  out["messages"] = json::array();
  int step = 0;
  for (const Message& m : d.messages) {
    json e;
    e["step"] = ++step;
    e["sender"] = g.labels[m.sender];
    e["receiver"] = g.labels[m.receiver];
    e["breakpoints"] = json::array();
    for (const Rational& c : m.payload.partition_lambda.cuts)
      e["breakpoints"].push_back(c.str());
    e["partitions"] = json::array();
    for (const Partition& p : m.payload.partition_lambda.vals)
      e["partitions"].push_back(partition_labels(p, g));
    e["rates"] = json::array();
    int slot = 0;
    for (int u = 0; u < g.size(); ++u) {
      if (!(m.payload.prefix & bit(u))) continue;
      const PiecewiseAffine& r = m.payload.rates_lambda[slot++];
      json pieces = json::array();
      for (int k = 0; k < r.pieces(); ++k) {
        auto s = r.span(k);
        pieces.push_back({{"from", s.start.str()},
                          {"to", s.end.str()},
                          {"slope", r.vals[k].slope.str()},
                          {"intercept", r.vals[k].intercept.str()}});
      }
      e["rates"].push_back({{"user", g.labels[u]}, {"pieces", pieces}});
    }
    out["messages"].push_back(std::move(e));
  }
  return out.dump(2) + "\n";
}

}  // namespace psp
