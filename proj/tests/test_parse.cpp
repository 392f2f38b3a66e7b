#include <doctest.h>

#include <random>

#include "asyncst/parse.hpp"
#include "asyncst/pretty.hpp"
#include "asyncst/projection.hpp"
#include "helpers.hpp"

using namespace asyncst;

TEST_CASE("gui program parses into three objects with the right main call") {
  Program p = testing::corpusProgram("gui.async");
  CHECK(p.objects.size() == 3);
  CHECK(p.mainCallee == "U");
  CHECK(p.mainMethod == "start");
  REQUIRE(p.mainArgs.size() == 1);
  CHECK(std::get<Int>(p.mainArgs[0]->as<Expr::Lit>()->v) == 20);
  const ObjectDecl* u = p.object("U");
  REQUIRE(u);
  CHECK(u->field("state"));
  CHECK(u->field("expect"));
  CHECK(u->method("start"));
  CHECK(u->method("resume"));
}

TEST_CASE("minimal program") {
  Program p = parseProgram("object A { Int m(Int x){ return x; } } main { A!m(0); }");
  CHECK(p.objects.size() == 1);
  CHECK(p.objects[0].methods.size() == 1);
}

TEST_CASE("documented error classes") {
  CHECK_THROWS_AS(parseProgram("object A { Int m(Int x){ return x; } } main { A!k(0); }"),
                  ParseError);  // unresolved method
  CHECK_THROWS_AS(parseProgram("object A { Int m(Int x){ return x; } "
                               "Int m(Int y){ return y; } } main { A!m(0); }"),
                  ParseError);  // duplicate method
  CHECK_THROWS_AS(parseProgram("object A { Int m(Int x){ return x; skip; } } main { A!m(0); }"),
                  ParseError);  // return not final
  CHECK_THROWS_AS(parseProgram("object A { Int m(Int x){ return y; } } main { A!m(0); }"),
                  ParseError);  // unresolved variable
  CHECK_THROWS_AS(parseProgram("object A { Int m(Int x){ Int f = B!k(); return x; } } "
                               "main { A!m(0); }"),
                  ParseError);  // call target must be future-typed + unresolved B
}

TEST_CASE("round-trip on the corpus") {
  for (const char* f : {"gui.async", "repeat.async", "branch.async", "branch_deny.async",
                        "relay.async", "twostage.async", "deadlock.async"}) {
    Program p1 = testing::corpusProgram(f);
    Program p2 = parseProgram(prettyProgram(p1));
    CHECK(prettyProgram(p1) == prettyProgram(p2));
  }
  for (const char* f : {"gui.proto", "repeat.proto", "branch.proto", "relay.proto",
                        "twostage.proto"}) {
    GlobalType g1 = testing::corpusProto(f);
    GlobalType g2 = parseGlobalType(prettyGlobal(g1));
    CHECK(prettyGlobal(g1) == prettyGlobal(g2));
  }
}

TEST_CASE("pretty prints skip") {
  CHECK(prettyStmt(mkStmt(Stmt::Skip{})) == "skip;");
}

TEST_CASE("projected local types round-trip through their ASCII form") {
  for (const char* f : {"gui.proto", "repeat.proto", "branch.proto"}) {
    GlobalType g = testing::corpusProto(f);
    for (const auto& x : g.roles()) {
      LocalType t = propagate(projectOnObject(g, x));
      LocalType back = parseLocalType(prettyLocal(t), x);
      CHECK(localEqual(t, back));
    }
  }
}

TEST_CASE("protocol rejects modalities in annotations") {
  // Modalities are not expressible in the protocol surface grammar at all;
  // formulas with unknown operators are syntax errors.
  CHECK_THROWS_AS(parseGlobalType("main -> A.m { post: [x = 1] top } end"), ParseError);
}

TEST_CASE("parser survives hostile bytes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string junk;
    int len = (int)(rng() % 60);
    for (int k = 0; k < len; ++k) junk.push_back((char)(rng() % 256));
    try {
      parseProgram(junk);
    } catch (const ParseError&) {
    }
    try {
      parseGlobalType(junk);
    } catch (const ParseError&) {
    }
  }
  CHECK(true);
}
