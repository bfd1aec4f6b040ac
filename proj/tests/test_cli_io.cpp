#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "json.hpp"
#include "psp/dendrogram.hpp"
#include "psp/distributed.hpp"
#include "psp/problem_io.hpp"
#include "psp/psp.hpp"

using namespace psp;
using nlohmann::ordered_json;

namespace {

std::string two_user_text() {
  return R"({
  "schema": 1,
  "model": "bits",
  "users": ["1", "2"],
  "bits": {"1": ["a"], "2": ["a", "b"]}
})";
}

// Replaces exactly one occurrence; fails the test if the needle is absent.
std::string patched(std::string text, const std::string& needle,
                    const std::string& replacement) {
  size_t at = text.find(needle);
  REQUIRE(at != std::string::npos);
  text.replace(at, needle.size(), replacement);
  return text;
}

}  // namespace

TEST_CASE("problem parsing accepts the four models") {
  Problem bits = parse_problem(two_user_text());
  CHECK(bits.model == ProblemModel::Bits);
  CHECK(std::string(model_name(bits.model)) == "bits");
  CHECK(bits.oracle->size() == 2);
  CHECK(bits.oracle->ground().labels ==
        std::vector<std::string>{"1", "2"});
  CHECK(bits.oracle->value(0b01) == Rational(1));
  CHECK(bits.oracle->value(0b10) == Rational(2));
  CHECK(bits.oracle->total() == Rational(2));
  CHECK(bits.oracle->monotone());

  Problem gf2 = parse_problem(R"({
    "schema": 1,
    "model": "gf2",
    "users": ["1", "2", "3"],
    "gf2": {"1": ["100"], "2": ["010"], "3": ["110", "001"]}
  })");
  CHECK(gf2.model == ProblemModel::Gf2);
  CHECK(std::string(model_name(gf2.model)) == "gf2");
  CHECK(gf2.oracle->value(0b001) == Rational(1));
  CHECK(gf2.oracle->value(0b100) == Rational(2));
  CHECK(gf2.oracle->value(0b011) == Rational(2));
  CHECK(gf2.oracle->value(0b101) == Rational(3));
  CHECK(gf2.oracle->total() == Rational(3));

  Problem graph = parse_problem(R"({
    "schema": 1,
    "model": "graph",
    "users": ["1", "2", "3"],
    "graph": {"edges": [["1", "2", 1], ["1", "3", 1], ["2", "3", 1]]}
  })");
  CHECK(graph.model == ProblemModel::Graph);
  CHECK(std::string(model_name(graph.model)) == "graph");
  CHECK(graph.oracle->value(0b001) == Rational(2));
  CHECK(graph.oracle->value(0b011) == Rational(2));
  CHECK(graph.oracle->total() == Rational(0));
  CHECK(!graph.oracle->monotone());

  Problem table = parse_problem(R"({
    "schema": 1,
    "model": "table",
    "users": ["a", "b"],
    "table": {"a": 1, "b": 1, "a,b": "3/2"}
  })");
  CHECK(table.model == ProblemModel::Table);
  CHECK(std::string(model_name(table.model)) == "table");
  CHECK(table.oracle->value(0b01) == Rational(1));
  CHECK(table.oracle->value(0b10) == Rational(1));
  CHECK(table.oracle->total() == Rational(3, 2));
  CHECK(table.oracle->monotone());
}

TEST_CASE("problem parsing rejects malformed documents") {
  auto reject = [](const std::string& text, const std::string& message) {
    CHECK_THROWS_WITH_AS(parse_problem(text), message.c_str(),
                         ProblemParseError);
  };

  reject(R"({"schema": 1, "model": "zzz", "users": ["a"]})",
         "problem: unknown model zzz");
  reject(R"({"model": "bits", "users": ["a"], "bits": {"a": []}})",
         "problem: missing or unsupported schema");
  reject(R"({"schema": 2, "model": "bits", "users": ["a"],
             "bits": {"a": []}})",
         "problem: missing or unsupported schema");
  reject(R"({"schema": 1, "model": "bits", "users": ["a", "a"],
             "bits": {"a": []}})",
         "users: duplicate label a");
  reject(R"({"schema": 1, "model": "bits", "users": ["a"],
             "bits": {"a": []}, "foo": 3})",
         "problem: unknown key foo");
  reject(R"({"schema": 1, "model": "bits", "users": ["a"],
             "bits": {"a": [], "b": []}})",
         "bits: unknown user b");
  reject(R"({"schema": 1, "model": "bits", "users": ["a", "b"],
             "bits": {"a": []}})",
         "bits: missing user b");
  reject(R"({"schema": 1, "model": "gf2", "users": ["a"],
             "gf2": {"a": ["10x"]}})",
         "gf2: rows must be 0/1 strings");
  reject(R"({"schema": 1, "model": "gf2", "users": ["a"],
             "gf2": {"a": ["10", "011"]}})",
         "gf2: rows must all have the same length");
  reject(R"({"schema": 1, "model": "graph", "users": ["1", "2"],
             "graph": {"edges": [["1", "x", 1]]}})",
         "graph: unknown endpoint in edge");
  reject(R"({"schema": 1, "model": "graph", "users": ["1", "2"],
             "graph": {"edges": [["1", "1", 1]]}})",
         "graph: self-loops not allowed");
  reject(R"({"schema": 1, "model": "graph", "users": ["1", "2"],
             "graph": {"edges": [["1", "2", 0]]}})",
         "graph: edge weights must be positive");
  reject(R"({"schema": 1, "model": "graph", "users": ["1", "2"],
             "graph": {"edges": [["1", "2", 0.5]]}})",
         "graph: edge weight: expected an integer or rational string");

  // The same weight written as an exact rational string is accepted.
  Problem half = parse_problem(R"({
    "schema": 1,
    "model": "graph",
    "users": ["1", "2"],
    "graph": {"edges": [["1", "2", "5/2"]]}
  })");
  CHECK(half.oracle->value(0b01) == Rational(5, 2));

  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1, "": 2, "a,b": 2}})",
         "table: empty subset key");
  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1, "a,a": 2}})",
         "table: repeated user in key a,a");
  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1, "a,c": 2}})",
         "table: unknown user c in key a,c");
  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1, "a,b": 2, "b,a": 2}})",
         "table: duplicate subset a,b");
  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1}})",
         "table: missing subset a,b");
  reject(R"({"schema": 1, "model": "table", "users": ["a", "b"],
             "table": {"a": 1, "b": 1, "a,b": 3}})",
         "table: submodularity violated at base {} with pair {a,b}");

  // Subset keys are order-insensitive: "b,a" names the same subset.
  Problem swapped = parse_problem(R"({
    "schema": 1,
    "model": "table",
    "users": ["a", "b"],
    "table": {"a": 1, "b": 1, "b,a": "3/2"}
  })");
  CHECK(swapped.oracle->total() == Rational(3, 2));
}

TEST_CASE("size caps raise the dedicated error") {
  auto users_json = [](int n) {
    std::string out = "[";
    for (int i = 0; i < n; ++i)
      out += (i ? ", \"" : "\"") + std::to_string(i + 1) + "\"";
    return out + "]";
  };

  {
    std::string text = R"({"schema": 1, "model": "bits", "users": )" +
                       users_json(23) + R"(, "bits": {}})";
    CHECK_THROWS_WITH_AS(parse_problem(text), "users: more than 22 users",
                         SizeGuardError);
  }
  {
    std::string text = R"({"schema": 1, "model": "gf2", "users": ["a"],
                           "gf2": {"a": [")" +
                       std::string(65, '1') + R"("]}})";
    CHECK_THROWS_WITH_AS(parse_problem(text), "gf2: more than 64 columns",
                         SizeGuardError);
  }
  {
    std::string text = R"({"schema": 1, "model": "table", "users": )" +
                       users_json(13) + R"(, "table": {}})";
    CHECK_THROWS_WITH_AS(parse_problem(text), "table: more than 12 users",
                         SizeGuardError);
  }
  {
    // 22 users x 12 private bit labels = 264 distinct bits.
    std::string payload;
    for (int u = 0; u < 22; ++u) {
      payload += (u ? ", \"" : "\"") + std::to_string(u + 1) + "\": [";
      for (int b = 0; b < 12; ++b)
        payload += (b ? ", \"" : "\"") + std::to_string(u) + "_" +
                   std::to_string(b) + "\"";
      payload += "]";
    }
    std::string text = R"({"schema": 1, "model": "bits", "users": )" +
                       users_json(22) + R"(, "bits": {)" + payload + "}}";
    CHECK_THROWS_WITH_AS(parse_problem(text),
                         "bits: more than 256 distinct bits", SizeGuardError);
  }
}

TEST_CASE("problem files load from disk") {
  Problem p = load_problem(std::string(PSP_DATA_DIR) + "/example1.json");
  CHECK(p.model == ProblemModel::Bits);
  CHECK(p.oracle->size() == 5);
  CHECK(p.oracle->total() == Rational(10));

  CHECK_THROWS_WITH_AS(load_problem("/nonexistent/xx.json"),
                       "cannot open /nonexistent/xx.json", ProblemParseError);
}

TEST_CASE("report documents round-trip byte for byte") {
  Problem p = parse_problem(two_user_text());
  const GroundSet& g = p.oracle->ground();
  PspReport report = par(*p.oracle, {0, 1});
  ReportDoc doc = make_report_doc(report, g, "par", p.model, {0, 1});

  CHECK(doc.algorithm == "par");
  CHECK(doc.model == "bits");
  CHECK(doc.users == std::vector<std::string>{"1", "2"});
  CHECK(doc.order == std::vector<std::string>{"1", "2"});
  CHECK(doc.alpha0 == "2");
  CHECK(!doc.degenerate);
  CHECK(doc.breakpoints_alpha == std::vector<std::string>{"1"});
  CHECK(doc.breakpoints_lambda == std::vector<std::string>{"1"});
  REQUIRE(doc.chain.size() == 2);
  CHECK(doc.chain[0] ==
        std::vector<std::vector<std::string>>{{"1"}, {"2"}});
  CHECK(doc.chain[1] == std::vector<std::vector<std::string>>{{"1", "2"}});
  CHECK(doc.fundamental_partition ==
        std::vector<std::vector<std::string>>{{"1"}, {"2"}});
  CHECK(doc.r_aco == "1");
  CHECK(doc.r_nco == "1");
  CHECK(doc.mmi == "1");
  CHECK(doc.secret_capacity == "1");
  CHECK(!doc.strength.has_value());
  CHECK(doc.optimal_rate_aco == std::vector<std::string>{"0", "1"});
  CHECK(doc.optimal_rate_nco == std::vector<std::string>{"0", "1"});
  CHECK(doc.sfm_call_count == 1);

  std::string text = serialize_report(doc);
  CHECK(text.back() == '\n');
  ReportDoc back = parse_report(text);
  CHECK(back == doc);
  CHECK(serialize_report(back) == text);

  // Stable key order in the serialized document.
  size_t pos = 0;
  for (const char* key :
       {"\"schema\"", "\"algorithm\"", "\"model\"", "\"users\"", "\"order\"",
        "\"alpha0\"", "\"degenerate\"", "\"breakpoints_alpha\"",
        "\"breakpoints_lambda\"", "\"chain\"", "\"fundamental_partition\"",
        "\"r_aco\"", "\"r_nco\"", "\"mmi\"", "\"secret_capacity\"",
        "\"optimal_rate_aco\"", "\"optimal_rate_nco\"",
        "\"sfm_call_count\""}) {
    size_t at = text.find(key, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
  CHECK(text.find("\"strength\"") == std::string::npos);
}

TEST_CASE("report parsing is strict") {
  Problem p = parse_problem(two_user_text());
  PspReport report = par(*p.oracle, {0, 1});
  ReportDoc doc =
      make_report_doc(report, p.oracle->ground(), "par", p.model, {0, 1});
  const std::string text = serialize_report(doc);

  CHECK_THROWS_AS(parse_report("nope"), ProblemParseError);
  CHECK_THROWS_AS(
      parse_report(patched(text, "\"r_aco\": \"1\"", "\"r_aco\": \"2/4\"")),
      ProblemParseError);
  CHECK_THROWS_AS(
      parse_report(patched(text, "\"schema\": 1,",
                           "\"schema\": 1,\n  \"bogus\": 3,")),
      ProblemParseError);
  CHECK_THROWS_AS(parse_report(patched(text, "  \"mmi\": \"1\",\n", "")),
                  ProblemParseError);
  CHECK_THROWS_AS(
      parse_report(
          patched(text, "\"degenerate\": false", "\"degenerate\": 0")),
      ProblemParseError);
  CHECK_THROWS_AS(
      parse_report(patched(text, "\"schema\": 1,", "\"schema\": 2,")),
      ProblemParseError);
  CHECK_THROWS_AS(
      parse_report(patched(text, "\"sfm_call_count\": 1",
                           "\"sfm_call_count\": \"1\"")),
      ProblemParseError);
}

TEST_CASE("graph reports carry the strength field") {
  Problem p = parse_problem(R"({
    "schema": 1,
    "model": "graph",
    "users": ["1", "2", "3"],
    "graph": {"edges": [["1", "2", 1], ["1", "3", 1], ["2", "3", 1]]}
  })");
  PspReport report = par(*p.oracle, {0, 1, 2});
  ReportDoc doc =
      make_report_doc(report, p.oracle->ground(), "par", p.model, {0, 1, 2});

  CHECK(doc.model == "graph");
  CHECK(doc.alpha0 == "0");
  CHECK(doc.breakpoints_alpha == std::vector<std::string>{"-3"});
  CHECK(doc.breakpoints_lambda == std::vector<std::string>{"3"});
  CHECK(doc.r_aco == "-3");
  CHECK(doc.mmi == "3");
  CHECK(doc.secret_capacity == "3");
  REQUIRE(doc.strength.has_value());
  CHECK(*doc.strength == "3/2");

  // The sum of the optimal rate entries attains the minimum sum-rate.
  Rational sum(0);
  for (const std::string& s : doc.optimal_rate_aco)
    sum += *Rational::parse(s);
  CHECK(sum == Rational(-3));

  std::string text = serialize_report(doc);
  size_t cap = text.find("\"secret_capacity\"");
  size_t str = text.find("\"strength\"");
  size_t aco = text.find("\"optimal_rate_aco\"");
  REQUIRE(str != std::string::npos);
  CHECK(cap < str);
  CHECK(str < aco);
  CHECK(parse_report(text) == doc);
  CHECK(serialize_report(parse_report(text)) == text);
}

TEST_CASE("hand-off log lists every message in protocol order") {
  Problem p = load_problem(std::string(PSP_DATA_DIR) + "/example3.json");
  DistrResult d = distr_par(*p.oracle, {0, 1, 2, 3});
  std::string text = serialize_message_log(d, p.oracle->ground());
  CHECK(text.back() == '\n');

  ordered_json log = ordered_json::parse(text);
  CHECK(log["schema"] == 1);
  REQUIRE(log["messages"].size() == 3);

  const auto& m0 = log["messages"][0];
  CHECK(m0["step"] == 1);
  CHECK(m0["sender"] == "1");
  CHECK(m0["receiver"] == "2");
  CHECK(m0["breakpoints"] == ordered_json::array());
  CHECK(m0["partitions"] == ordered_json::parse(R"([[["1"]]])"));
  REQUIRE(m0["rates"].size() == 1);
  CHECK(m0["rates"][0]["user"] == "1");
  CHECK(m0["rates"][0]["pieces"] == ordered_json::parse(R"([
    {"from": "0", "to": "4", "slope": "-1", "intercept": "2"}
  ])"));

  CHECK(log["messages"][1]["step"] == 2);
  CHECK(log["messages"][1]["sender"] == "2");
  CHECK(log["messages"][1]["receiver"] == "3");

  const auto& m2 = log["messages"][2];
  CHECK(m2["step"] == 3);
  CHECK(m2["sender"] == "3");
  CHECK(m2["receiver"] == "4");
  CHECK(m2["breakpoints"] == ordered_json::parse(R"(["3/2"])"));
  CHECK(m2["partitions"] ==
        ordered_json::parse(R"([[["1", "2", "3"]], [["1"], ["2"], ["3"]]])"));
  REQUIRE(m2["rates"].size() == 3);
  CHECK(m2["rates"][0]["user"] == "1");
  CHECK(m2["rates"][0]["pieces"] == ordered_json::parse(R"([
    {"from": "0", "to": "4", "slope": "-1", "intercept": "2"}
  ])"));
  CHECK(m2["rates"][1]["user"] == "2");
  CHECK(m2["rates"][1]["pieces"] == ordered_json::parse(R"([
    {"from": "0", "to": "1", "slope": "0", "intercept": "1"},
    {"from": "1", "to": "4", "slope": "-1", "intercept": "2"}
  ])"));
  CHECK(m2["rates"][2]["user"] == "3");
  CHECK(m2["rates"][2]["pieces"] == ordered_json::parse(R"([
    {"from": "0", "to": "1", "slope": "0", "intercept": "0"},
    {"from": "1", "to": "3/2", "slope": "1", "intercept": "-1"},
    {"from": "3/2", "to": "4", "slope": "-1", "intercept": "2"}
  ])"));
}

TEST_CASE("dendrogram mirrors the hierarchy") {
  Problem p = load_problem(std::string(PSP_DATA_DIR) + "/example3.json");
  PspReport report = par(*p.oracle, {0, 1, 2, 3});
  Dendrogram d = build_dendrogram(report.psp);
  const GroundSet& g = p.oracle->ground();

  CHECK(d.leaf_height == Rational(3, 2));
  REQUIRE(d.nodes.size() == 6);
  for (int u = 0; u < 4; ++u) {
    CHECK(d.nodes[u].user == u);
    CHECK(d.nodes[u].members == bit(u));
    CHECK(d.nodes[u].height == Rational(3, 2));
  }
  CHECK(d.nodes[4].members == 0b0111u);
  CHECK(d.nodes[4].height == Rational(3, 2));
  CHECK(d.nodes[4].children == std::vector<int>{0, 1, 2});
  CHECK(d.nodes[5].members == 0b1111u);
  CHECK(d.nodes[5].height == Rational(1));
  CHECK(d.nodes[5].children == std::vector<int>{4, 3});
  CHECK(d.root == 5);

  CHECK(dendrogram_newick(d, g) == "((1:0,2:0,3:0):1/2,4:1/2);\n");

  ordered_json doc = ordered_json::parse(dendrogram_json(d, g));
  CHECK(doc["schema"] == 1);
  CHECK(doc["leaf_height"] == "3/2");
  CHECK(doc["root"]["height"] == "1");
  REQUIRE(doc["root"]["children"].size() == 2);
  CHECK(doc["root"]["children"][0]["height"] == "3/2");
  CHECK(doc["root"]["children"][0]["members"] ==
        ordered_json::parse(R"(["1", "2", "3"])"));
  CHECK(doc["root"]["children"][0]["children"].size() == 3);
  CHECK(doc["root"]["children"][0]["children"][0] ==
        ordered_json::parse(R"({"user": "1"})"));
  CHECK(doc["root"]["children"][1] == ordered_json::parse(R"({"user": "4"})"));

  std::string dot = dendrogram_dot(d, g);
  CHECK(dot.find("graph dendrogram {") == 0);
  CHECK(dot.find("n0 [label=\"1\"];") != std::string::npos);
  CHECK(dot.find("n5 [label=\"merge@1\"];") != std::string::npos);
  CHECK(dot.find("n5 -- n4;") != std::string::npos);
  CHECK(dot.find("n5 -- n3;") != std::string::npos);
}

TEST_CASE("blocks that do not merge carry through without a node") {
  // Users 1 and 2 share their only bit; user 3 is independent.
  Problem p = parse_problem(R"({
    "schema": 1,
    "model": "bits",
    "users": ["1", "2", "3"],
    "bits": {"1": ["a"], "2": ["a"], "3": ["b"]}
  })");
  PspReport report = par(*p.oracle, {0, 1, 2});
  Dendrogram d = build_dendrogram(report.psp);

  REQUIRE(d.nodes.size() == 5);
  CHECK(d.leaf_height == Rational(1));
  CHECK(d.nodes[3].members == 0b011u);
  CHECK(d.nodes[3].height == Rational(1));
  CHECK(d.nodes[3].children == std::vector<int>{0, 1});
  CHECK(d.nodes[4].members == 0b111u);
  CHECK(d.nodes[4].height == Rational(0));
  CHECK(d.nodes[4].children == std::vector<int>{3, 2});
  CHECK(d.root == 4);
  CHECK(dendrogram_newick(d, p.oracle->ground()) == "((1:0,2:0):1,3:1);\n");
}

TEST_CASE("single user dendrogram is one leaf") {
  Problem p = parse_problem(R"({
    "schema": 1,
    "model": "bits",
    "users": ["1"],
    "bits": {"1": ["a", "b"]}
  })");
  PspReport report = par(*p.oracle, {0});
  Dendrogram d = build_dendrogram(report.psp);
  REQUIRE(d.nodes.size() == 1);
  CHECK(d.root == 0);
  CHECK(d.leaf_height == Rational(0));
  CHECK(dendrogram_newick(d, p.oracle->ground()) == "1;\n");
}

TEST_CASE("dendrogram construction rejects foreign hierarchies") {
  Psp empty;
  CHECK_THROWS_AS(build_dendrogram(empty), std::logic_error);

  Psp coarse;
  coarse.alpha0 = Rational(0);
  coarse.chain = {Partition{{0b11}}};
  CHECK_THROWS_AS(build_dendrogram(coarse), std::logic_error);
}

TEST_CASE("partition labels follow block order") {
  Problem p = load_problem(std::string(PSP_DATA_DIR) + "/example3.json");
  Partition q{{0b0111, 0b1000}};
  CHECK(partition_labels(q, p.oracle->ground()) ==
        std::vector<std::vector<std::string>>{{"1", "2", "3"}, {"4"}});
}
