#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "srl/parser.hpp"

using namespace srl;

namespace {

std::string load(const std::string& name) {
  const char* dir = std::getenv("SRL_MODELS_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::string(dir) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("minimal mln parses") {
  auto m = parse_model("prop P; sort person; pred R(person); mln { 1.0 : P -> R(x); }");
  REQUIRE(m.mln.has_value());
  CHECK(m.mln->formulas.size() == 1);
  CHECK(m.mln->formulas[0].weight == 1.0);
  CHECK_FALSE(m.mln->domain_aware);
  CHECK(m.mln->formulas[0].formula->kind == Formula::Implies);
}

TEST_CASE("minimal rlr parses") {
  auto m = parse_model("sort person; pred Q(person); rlr { node Q(x) { 0.0 : true; } }");
  REQUIRE(m.rlr.has_value());
  REQUIRE(m.rlr->nodes.size() == 1);
  CHECK(m.rlr->nodes[0].conditions.size() == 1);
  CHECK(m.rlr->nodes[0].conditions[0].weight == 0.0);
  CHECK(m.rlr->nodes[0].conditions[0].formula->kind == Formula::True);
  // Unannotated conditions default to proportional.
  CHECK(m.rlr->nodes[0].conditions[0].proportional);
}

TEST_CASE("dangling connective is a located syntax error") {
  try {
    parse_model("prop P; mln { 1.0 : P -> ; }");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("declaration errors are reported") {
  CHECK_THROWS_AS(parse_model("prop P; prop P; mln { }"), ParseError);
  CHECK_THROWS_AS(parse_model("prop P; mln { 1 : Q; }"), ParseError);
  CHECK_THROWS_AS(parse_model("pred R(person); mln { }"), ParseError);
  // Variable used at two sorts.
  CHECK_THROWS_AS(
      parse_model("sort a; sort b; pred R(a); pred S(b);"
                  "mln { 1 : R(x) & S(x); }"),
      ParseError);
  CHECK_THROWS_AS(parse_model("prop P; mln { 1 : P; } extra"), ParseError);
}

TEST_CASE("formula precedence: not > and > or > implies") {
  auto m = parse_model(
      "prop A; prop B; prop C; prop D; mln { 1 : !A & B | C -> D; }");
  const Formula& f = *m.mln->formulas[0].formula;
  REQUIRE(f.kind == Formula::Implies);
  REQUIRE(f.lhs->kind == Formula::Or);
  REQUIRE(f.lhs->lhs->kind == Formula::And);
  CHECK(f.lhs->lhs->lhs->kind == Formula::Not);
  CHECK(print_formula(*m.sig, f) == "!A & B | C -> D");
}

TEST_CASE("implication is right-associative and parentheses survive printing") {
  auto m = parse_model("prop A; prop B; prop C; mln { 1 : (A -> B) -> C; 2 : A -> B -> C; }");
  CHECK(print_formula(*m.sig, *m.mln->formulas[0].formula) == "(A -> B) -> C");
  CHECK(print_formula(*m.sig, *m.mln->formulas[1].formula) == "A -> B -> C");
}

TEST_CASE("comments and signed numbers lex") {
  auto m = parse_model(
      "// header\nprop P; // trailing\nmln { -1.5e-2 : P; +2 : !P; }");
  CHECK(m.mln->formulas[0].weight == doctest::Approx(-0.015));
  CHECK(m.mln->formulas[1].weight == 2.0);
}

TEST_CASE("mln scaling and aggregator options") {
  auto da = parse_model("prop P; mln { scaling: da aggregator: geomean; 1 : P; }");
  CHECK(da.mln->domain_aware);
  CHECK(da.mln->aggregator == Aggregator::GeoMean);
  auto none = parse_model("prop P; mln { scaling: none; 1 : P; }");
  CHECK_FALSE(none.mln->domain_aware);
}

TEST_CASE("constants in mln formulas compile to derived symbols") {
  auto m = parse_model(
      "sort person; const alice : person; pred R(person, person);"
      "mln { 1 : R(alice, y); }");
  const Formula& f = *m.mln->formulas[0].formula;
  REQUIRE(f.kind == Formula::Atom);
  const RelationInfo& info = m.sig->relation(f.rel);
  CHECK(info.is_derived());
  CHECK(info.arity() == 1);
  CHECK(info.base == m.sig->find_relation("R"));
  CHECK(info.pattern == std::vector<std::string>{"alice", ""});
  REQUIRE(f.args.size() == 1);
  CHECK(f.args[0].kind == Term::Var);
  // Printing reconstructs the constant notation.
  CHECK(print_formula(*m.sig, f) == "R(alice, y)");
}

TEST_CASE("rlr blocks reject constants") {
  CHECK_THROWS_AS(
      parse_model("sort person; const a : person; pred R(person);"
                  "rlr { node R(x) { 0 : true; } node2 }"),
      ParseError);
  try {
    parse_model(
        "sort person; const a : person; pred R(person); pred Q(person);"
        "rlr { node R(x) { 0 : true; } node Q(x) { 1 : R(a); } }");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("generic") != std::string::npos);
  }
}

TEST_CASE("rlr labels: flags, scaling sets, parents") {
  auto m = parse_model(
      "sort s; pred R(s); pred Q(s);"
      "rlr { node R(x) { -1 prop : true; }"
      "      node Q(x) { parents R; 2 raw : R(y) over {y}; } }");
  REQUIRE(m.rlr.has_value());
  const RlrNode& q = m.rlr->nodes[1];
  CHECK(q.declared_parents == std::vector<int>{m.sig->find_relation("R")});
  REQUIRE(q.conditions.size() == 1);
  CHECK_FALSE(q.conditions[0].proportional);
  REQUIRE(q.conditions[0].scaling_vars.size() == 1);
  CHECK(q.conditions[0].scaling_vars[0].first == "y");
}

TEST_CASE("scaling-set sort inference requires a single sort") {
  // y does not occur in the formula; with one sort it is inferred.
  auto ok = parse_model(
      "sort s; pred R(s); pred Q(s);"
      "rlr { node R(x) { 0 : true; } node Q(x) { 1 : R(x) over {y}; } }");
  CHECK(ok.rlr->nodes[1].conditions[0].scaling_vars.size() == 1);
  CHECK_THROWS_AS(
      parse_model("sort s; sort t; pred R(s); pred Q(s);"
                  "rlr { node R(x) { 0 : true; }"
                  "      node Q(x) { 1 : R(x) over {y}; } }"),
      ParseError);
}

TEST_CASE("invalid rlr structure is rejected at parse time") {
  // Cycle through the node's own relation.
  CHECK_THROWS_AS(
      parse_model("sort s; pred Q(s);"
                  "rlr { node Q(x) { 1 : Q(y) over {y}; } }"),
      ValidationError);
  // Head variable inside the scaling set.
  CHECK_THROWS_AS(
      parse_model("sort s; pred R(s); pred Q(s);"
                  "rlr { node R(x) { 0 : true; }"
                  "      node Q(x) { 1 : R(x) over {x}; } }"),
      ParseError);
}

TEST_CASE("queries parse elements and reject unknown symbols") {
  auto m = parse_model("sort s; pred R(s, s); rlr { node R(x, y) { 0 : true; } }");
  auto q = parse_query("R(e1, e3) & !R(e3, e1)", *m.sig);
  REQUIRE(q->kind == Formula::And);
  CHECK(q->lhs->args[0].kind == Term::Element);
  CHECK(q->lhs->args[0].element == 0);
  CHECK(q->lhs->args[1].element == 2);
  CHECK_THROWS_AS(parse_query("Z(e1)", *m.sig), ParseError);
  CHECK_THROWS_AS(parse_query("R(e0, e1)", *m.sig), ParseError);
  // Free variables are allowed in queries (grounded downstream).
  auto v = parse_query("R(x, y)", *m.sig);
  CHECK(free_variables(*v).size() == 2);
}

TEST_CASE("parse-print round trip is stable") {
  std::vector<std::string> sources = {
      "sort person;\nprop P;\npred R(person);\nmln {\n  scaling: none;\n"
      "  1 : P -> R(x);\n}\n",
      "sort s;\nprop A;\npred R(s, s);\nmln {\n  scaling: da aggregator: sum;\n"
      "  -0.25 : A & R(x, y) | !R(y, x);\n}\n",
      "sort s;\npred R(s);\npred Q(s);\nrlr {\n  node R(x) {\n"
      "    0.5 prop : true;\n  }\n  node Q(x) {\n"
      "    1 prop : R(y) over {y};\n    -2 raw : R(x);\n  }\n}\n",
      load("projectivity.rlr"),
      load("pollution-mixed.rlr"),
      load("chain3.rlr"),
      load("ex1.mln"),
      load("ex2-da.mln"),
  };
  for (const std::string& src : sources) {
    CAPTURE(src);
    std::string once = print_model(parse_model(src));
    std::string twice = print_model(parse_model(once));
    CHECK(once == twice);
  }
}

TEST_CASE("constants round-trip through printing") {
  std::string src =
      "sort person; const alice : person; pred R(person, person);"
      "mln { scaling: none; 1 : R(alice, y) & R(y, alice); }";
  std::string once = print_model(parse_model(src));
  CHECK(once.find("const alice : person;") != std::string::npos);
  CHECK(once.find("R(alice, y)") != std::string::npos);
  CHECK(print_model(parse_model(once)) == once);
}
