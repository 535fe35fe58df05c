#include <string>

#include "blogc/frontend/lexer.hpp"
#include "blogc/frontend/parser.hpp"
#include "blogc/frontend/printer.hpp"
#include "blogc/frontend/validate.hpp"
#include "doctest.h"

using namespace blogc::fe;

namespace {
std::string model_path(const std::string& name) { return std::string(BLOGC_MODELS_DIR) + "/" + name + ".blog"; }

const char* const kAllModels[] = {"burglary", "hurricane", "urnball_20_2", "urnball_20_10", "urnball_40_20", "gmm", "infgmm"};
}  // namespace

TEST_CASE("tokenize a random declaration") {
  auto toks = tokenize("random Real x ~ Gaussian(0,1);");
  REQUIRE(toks.size() == 11);
  CHECK(toks[0].kind == Tok::Random);
  CHECK(toks[1].kind == Tok::Ident);
  CHECK(toks[1].text == "Real");
  CHECK(toks[2].text == "x");
  CHECK(toks[3].kind == Tok::Tilde);
  CHECK(toks[4].text == "Gaussian");
  CHECK(toks[10].kind == Tok::Semi);
}

TEST_CASE("tokenize number variable and comments") {
  auto toks = tokenize("#Ball // the urn\n");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].kind == Tok::Hash);
  CHECK(toks[1].kind == Tok::Ident);
  CHECK(toks[1].text == "Ball");
  CHECK(tokenize("").empty());
  CHECK(tokenize("  // nothing\n").empty());
}

TEST_CASE("tokens carry positions") {
  auto toks = tokenize("type A;\n  query x;");
  CHECK(toks[3].loc.line == 2);
  CHECK(toks[3].loc.col == 3);
}

TEST_CASE("illegal character is a lexical error with its position") {
  try {
    tokenize("type A;\ntype $B;");
    FAIL("expected an error");
  } catch (const SyntaxError& e) {
    CHECK(e.loc().line == 2);
    CHECK(e.loc().col == 6);
  }
}

TEST_CASE("missing semicolon reports the offending token") {
  try {
    parse_source("type Ball\nrandom Real x ~ Gaussian(0, 1);");
    FAIL("expected an error");
  } catch (const SyntaxError& e) {
    CHECK(e.loc().line == 2);
    CHECK(std::string(e.what()).find("expected ';'") != std::string::npos);
  }
}

TEST_CASE("urn-ball parses into its declarations") {
  Model m = parse_source(
      "type Ball; type Draw; type Color; distinct Color Blue, Green; distinct Draw D[3];\n"
      "#Ball ~ UniformInt(1, 20);\n"
      "random Color color(Ball b) ~ Categorical({Blue -> 0.9, Green -> 0.1});\n"
      "random Ball drawn(Draw d) ~ UniformChoice({Ball b});\n"
      "obs color(drawn(D[0])) = Blue;\n"
      "query color(drawn(D[2]));\n");
  REQUIRE(m.number_stmts.size() == 1);
  CHECK(m.number_stmts[0].type_name == "Ball");
  CHECK(m.number_stmts[0].body->kind == ExprKind::Dist);
  CHECK(m.number_stmts[0].body->name == "UniformInt");
  CHECK(m.number_stmts[0].body->args[1]->ival == 20);
  REQUIRE(m.random_fns.size() == 2);
  CHECK(m.random_fns[0].name == "color");
  CHECK(m.random_fns[1].name == "drawn");
  REQUIRE(m.evidence.size() == 1);
  CHECK(print_expr(*m.evidence[0].lhs) == "color(drawn(D[0]))");
  REQUIRE(m.queries.size() == 1);
  CHECK(print_expr(*m.queries[0].expr) == "color(drawn(D[2]))");
}

TEST_CASE("infinite GMM parses") {
  TypedModel tm = load_model_file(model_path("infgmm"));
  CHECK(tm.model.number_stmts.size() == 1);
  CHECK(tm.model.number_stmts[0].type_name == "Cluster");
  REQUIRE(tm.model.random_fns.size() == 3);
  CHECK(tm.model.random_fns[0].name == "mu");
  CHECK(tm.model.random_fns[1].name == "z");
  CHECK(tm.model.random_fns[2].name == "x");
}

TEST_CASE("case desugars into a nested if chain") {
  Model m = parse_source(
      "type T; distinct T a, b, c;\n"
      "random Real f(T t) ~ case t in {a -> Gaussian(0, 1), b -> Gaussian(1, 1), c -> Gaussian(2, 1)};\n");
  const Expr& body = *m.random_fns[0].body;
  REQUIRE(body.kind == ExprKind::If);
  CHECK(body.args[0]->kind == ExprKind::Binary);
  CHECK(body.args[0]->name == "==");
  REQUIRE(body.args[2]->kind == ExprKind::If);
  CHECK(body.args[2]->args[2]->kind == ExprKind::Dist);
  CHECK(body.case_keys.size() == 3);
}

TEST_CASE("print then parse reproduces every bundled model") {
  for (const char* name : kAllModels) {
    CAPTURE(name);
    TypedModel tm = load_model_file(model_path(name));
    const std::string printed = print_model(tm.model);
    Model again = parse_source(printed);
    CHECK(structurally_equal(tm.model, again));
    CHECK(print_model(again) == printed);
  }
}

TEST_CASE("validated urn-ball has typed signatures") {
  TypedModel tm = load_model_file(model_path("urnball_20_2"));
  const int ball = tm.find_type("Ball");
  const int draw = tm.find_type("Draw");
  const int color = tm.find_type("Color");
  const FuncDecl& drawn = tm.model.random_fns[tm.find_random("drawn")];
  CHECK(drawn.params[0].type == Type::object(draw));
  CHECK(drawn.ret == Type::object(ball));
  const FuncDecl& col = tm.model.random_fns[tm.find_random("color")];
  CHECK(col.params[0].type == Type::object(ball));
  CHECK(col.ret == Type::object(color));
  CHECK(tm.open(ball));
  CHECK_FALSE(tm.open(draw));
  CHECK(tm.types[draw].objects.size() == 3);
  CHECK(tm.object_name(draw, 2) == "D[2]");
  CHECK(tm.object_name(ball, 4) == "Ball[4]");
}

namespace {
void check_typed(const Expr& e) {
  CHECK(e.type.kind != Type::Kind::Unknown);
  for (const auto& a : e.args) check_typed(*a);
}
}  // namespace

TEST_CASE("every expression of a validated model carries a type") {
  for (const char* name : kAllModels) {
    CAPTURE(name);
    TypedModel tm = load_model_file(model_path(name));
    for (const auto& f : tm.model.random_fns) check_typed(*f.body);
    for (const auto& f : tm.model.fixed_fns) check_typed(*f.body);
    for (const auto& n : tm.model.number_stmts) check_typed(*n.body);
    for (const auto& o : tm.model.evidence) check_typed(*o.lhs);
    for (const auto& q : tm.model.queries) check_typed(*q.expr);
  }
}

namespace {
std::string validation_error(const std::string& src) {
  try {
    load_model(src);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("validation errors") {
  CHECK(validation_error("random Real x ~ Gaussian(f(1), 1);").find("undeclared function 'f'") != std::string::npos);
  CHECK(validation_error("random Boolean b ~ b;").find("unconditional cycle") != std::string::npos);
  CHECK(validation_error("random Real x ~ Gaussian(0);").find("expects 2") != std::string::npos);
  CHECK(validation_error("random Real x ~ Bernoulli(0.5);").find("type mismatch") != std::string::npos);
  CHECK(validation_error("random Real x ~ Gaussian(Gaussian(0,1), 1);").find("tail position") != std::string::npos);
  CHECK(validation_error("type T; distinct T a, b;\nrandom Real f(T t) ~ case t in {a -> 1.0, a -> 2.0};")
            .find("duplicate case key") != std::string::npos);
  CHECK(validation_error("type T; distinct T a, b, c;\nrandom Real f(T t) ~ case t in {a -> 1.0, b -> 2.0};")
            .find("not exhaustive") != std::string::npos);
  CHECK(validation_error("type T; #T ~ Poisson(3); distinct T a;").find("cannot have a number statement") !=
        std::string::npos);
  CHECK(validation_error("random Boolean b ~ Bernoulli(0.5);\nobs b = 3;").find("wrong type") != std::string::npos);
  // every message names a source line
  CHECK(validation_error("random Boolean b ~ b;").rfind("line 1:", 0) == 0);
}

TEST_CASE("self reference inside a branch is allowed") {
  CHECK_NOTHROW(load_model("random Boolean a ~ Bernoulli(0.5);\nrandom Boolean b ~ if a then Bernoulli(0.1) else Bernoulli(0.2);"));
  CHECK_NOTHROW(load_model("type T; distinct T u, v;\nrandom Boolean f(T t) ~ if t == u then Bernoulli(0.3) else f(u);"));
}
