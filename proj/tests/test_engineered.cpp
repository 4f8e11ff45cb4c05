#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "patchclf/engineered.hpp"
#include "patchclf/synthetic.hpp"

using namespace patchclf;

namespace {

EngineeredVector features(const std::string& diff) { return extract_all(parse_diff(diff)); }

const char* kPatch7 =
    "--- a/src/Lang/Unit2.java\n"
    "+++ b/src/Lang/Unit2.java\n"
    "@@ -59,5 +59,5 @@\n"
    "     index = offset * 2;\n"
    "     log.debug(message);\n"
    "-    list.add(entry);\n"
    "-    val_2 = compute(a, b);\n"
    "+    list.add(entry);\n"
    "+    acc_2 = compute(b, a);\n"
    "     String name = node.getName();\n";

}  // namespace

TEST_CASE("registry layout") {
  const auto names = engineered_feature_names();
  REQUIRE(names.size() == 72);
  CHECK(names[0] == "singleLine");
  CHECK(names[11] == "onlyRemoval");
  CHECK(names[12] == "buggy_kw_if");
  CHECK(names[32] == "patched_kw_if");
  CHECK(names[52] == "delta_kw_if");
  CHECK(names[71] == "delta_calls");
  CHECK(registry_to_json()["version"] == "lexical-1");
}

TEST_CASE("synthetic patch 7 golden vector") {
  // Every flag is 0: the re-added statement keeps its position and the
  // second pair differs in identifiers.
  std::map<std::string, double> nonzero = {
      {"buggy_op_arithmetic", 1}, {"buggy_op_assignment", 3}, {"buggy_lit_numeric", 1}, {"buggy_calls", 4},
      {"patched_op_arithmetic", 1}, {"patched_op_assignment", 3}, {"patched_lit_numeric", 1}, {"patched_calls", 4},
  };
  const auto v = features(kPatch7);
  for (std::size_t i = 0; i < v.names.size(); ++i) {
    const auto it = nonzero.find(v.names[i]);
    CHECK_MESSAGE(v.values(static_cast<Eigen::Index>(i)) == (it == nonzero.end() ? 0.0 : it->second), v.names[i]);
  }

  SyntheticConfig cfg;
  cfg.bugs = 4;
  cfg.mode = SignalMode::Xor;
  cfg.seed = 1;
  const auto synth = generate_synthetic(cfg);
  CHECK(synth.corpus.records[7].diff_text == kPatch7);
  CHECK(extract_all(synth.corpus.records[7]).values == v.values);
}

TEST_CASE("pattern flags") {
  SUBCASE("single line addition") {
    const auto v = features("@@ -1 +1,2 @@\n a();\n+b();\n");
    CHECK(v.at("singleLine") == 1);
    CHECK(v.at("onlyAddition") == 1);
    CHECK(v.at("onlyRemoval") == 0);
  }
  SUBCASE("removal only") {
    const auto v = features("@@ -1,2 +1 @@\n a();\n-b();\n-c();\n");
    CHECK(v.at("onlyRemoval") == 1);
    CHECK(v.at("singleLine") == 0);
  }
  SUBCASE("wraps if") {
    const auto v = features("@@ -1,2 +1,4 @@\n a();\n+if (x != null) {\n   b();\n+}\n");
    CHECK(v.at("wrapsIf") == 1);
    CHECK(v.at("unwrapIf") == 0);
    CHECK(v.at("conditionalBlockAdd") == 1);
    CHECK(v.at("conditionalBlockRemove") == 0);
  }
  SUBCASE("unwrap if") {
    const auto v = features("@@ -1,4 +1,2 @@\n a();\n-if (x != null) {\n   b();\n-}\n");
    CHECK(v.at("unwrapIf") == 1);
    CHECK(v.at("wrapsIf") == 0);
    CHECK(v.at("conditionalBlockRemove") == 1);
  }
  SUBCASE("wraps try") {
    const auto v = features("@@ -1 +1,4 @@\n+try {\n   b();\n+} catch (Exception e) {\n+}\n");
    CHECK(v.at("wrapsTryCatch") == 1);
    CHECK(v.at("unwrapTryCatch") == 0);
  }
  SUBCASE("constant change") {
    const auto v = features("@@ -1 +1 @@\n-x = 1;\n+x = 2;\n-s = \"a\";\n+s = \"b\";\n");
    CHECK(v.at("constantChange") == 1);
    CHECK(v.at("expressionFix") == 0);
    CHECK(features("@@ -1 +1 @@\n-x = 1;\n+y = 1;\n").at("constantChange") == 0);
  }
  SUBCASE("expression fix") {
    const auto v = features("@@ -1 +1 @@\n-if (a > b) {\n+if (a >= b) {\n");
    CHECK(v.at("expressionFix") == 1);
    CHECK(v.at("constantChange") == 0);
    CHECK(features("@@ -1 +1 @@\n-if (a > b) { f(); }\n+if (a > b) { g(); }\n").at("expressionFix") == 0);
  }
  SUBCASE("code move") {
    const auto moved = features("@@ -1,4 +1,4 @@\n ctx();\n-list.add(e);\n other();\n+list.add(e);\n");
    CHECK(moved.at("codeMove") == 1);
    const auto same = features("@@ -1,3 +1,3 @@\n ctx();\n-list.add(e);\n+list.add(e);\n");
    CHECK(same.at("codeMove") == 0);
  }
}

TEST_CASE("counters and deltas") {
  const auto v = features(
      "@@ -1 +1 @@\n-if (a == null) return \"x\";\n+if (a == null || b != 0) { throw new E(true); }\n");
  CHECK(v.at("buggy_kw_if") == 1);
  CHECK(v.at("buggy_kw_null") == 1);
  CHECK(v.at("buggy_kw_return") == 1);
  CHECK(v.at("buggy_lit_string") == 1);
  CHECK(v.at("buggy_op_relational") == 1);
  CHECK(v.at("patched_op_relational") == 2);
  CHECK(v.at("patched_op_logical") == 1);
  CHECK(v.at("patched_kw_throw") == 1);
  CHECK(v.at("patched_kw_new") == 1);
  CHECK(v.at("patched_lit_boolean") == 1);
  CHECK(v.at("patched_lit_numeric") == 1);
  CHECK(v.at("patched_calls") == 1);
  CHECK(v.at("delta_kw_return") == -1);
  CHECK(v.at("delta_op_relational") == 1);
  CHECK(v.at("delta_lit_string") == -1);
}

TEST_CASE("lexer") {
  const auto lx = lex("s = \"a + b\"; x >>>= 2; c = 'q';");
  REQUIRE(lx.size() == 12);
  CHECK(lx[2] == Lexeme{LexemeKind::String, "\"a + b\""});
  CHECK(lx[5] == Lexeme{LexemeKind::Operator, ">>>="});
  CHECK(lx[6] == Lexeme{LexemeKind::Number, "2"});
  CHECK(lx[10].kind == LexemeKind::String);
}
