#include <doctest.h>

#include "asyncst/constraints.hpp"
#include "asyncst/parse.hpp"
#include "asyncst/typecheck.hpp"
#include "helpers.hpp"

using namespace asyncst;

namespace {

CheckReport checkPair(const std::string& prog, const std::string& proto) {
  Program p = testing::corpusProgram(prog);
  GlobalType g = parseGlobalType(testing::readCorpus(proto), &p);
  return checkProgram(p, g);
}

bool hasRule(const CheckReport& rep, const std::string& rule) {
  for (const auto& e : rep.errors)
    if (e.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("the running example is well-typed") {
  CheckReport rep = checkPair("gui.async", "gui.proto");
  for (const auto& e : rep.errors) MESSAGE(e.str());
  CHECK(rep.ok);
  CHECK(!rep.unknown);
  CHECK(rep.adm.ok);
  CHECK(rep.graph.graph.getEdges.size() == 1);
}

TEST_CASE("all corpus pairs are well-typed") {
  const char* pairs[][2] = {{"gui.async", "gui.proto"},
                            {"repeat.async", "repeat.proto"},
                            {"branch.async", "branch.proto"},
                            {"branch_deny.async", "branch.proto"},
                            {"relay.async", "relay.proto"},
                            {"twostage.async", "twostage.proto"}};
  for (const auto& [prog, proto] : pairs) {
    CheckReport rep = checkPair(prog, proto);
    for (const auto& e : rep.errors) MESSAGE(prog, ": ", e.str());
    CHECK(rep.ok);
  }
}

TEST_CASE("wrong initializing call fails T-Main") {
  CheckReport rep = checkPair("mutants/gui_wrongmain.async", "gui.proto");
  CHECK(!rep.ok);
  CHECK(hasRule(rep, "T-Main"));
}

TEST_CASE("dropped get fails at the read obligation") {
  CheckReport rep = checkPair("mutants/gui_dropget.async", "gui.proto");
  CHECK(!rep.ok);
  CHECK(hasRule(rep, "T-Get"));
}

TEST_CASE("broken heap postcondition fails T-Return") {
  CheckReport rep = checkPair("mutants/gui_wrongpost.async", "gui.proto");
  CHECK(!rep.ok);
  CHECK(hasRule(rep, "T-Return"));
}

TEST_CASE("an extra helper method only warns") {
  Program p = parseProgram(R"(
object A {
  Int m(Int x) { return x; }
  Int helper(Int y) { return y + 1; }
}
main { A!m(0); }
)");
  GlobalType g = parseGlobalType("main -> A.m(x) { post: top } end", &p);
  CheckReport rep = checkProgram(p, g);
  CHECK(rep.ok);
  bool warned = false;
  for (const auto& w : rep.warnings)
    warned = warned || w.where == "A.helper";
  CHECK(warned);
}

TEST_CASE("a missing method implementation is an error") {
  Program p = parseProgram("object A { Int m(Int x) { return x; } } main { A!m(0); }");
  GlobalType g = parseGlobalType(
      "main -> A.m(x) { post: top } A -> B.k { pre: top, post: top } end", &p);
  CheckReport rep = checkProgram(p, g);
  CHECK(!rep.ok);  // role B is not even declared
  CHECK(hasRule(rep, "T-Main"));
}

TEST_CASE("edge set equals the T-Get formula computed from points-to directly") {
  Program p = testing::corpusProgram("gui.async");
  GlobalType g = parseGlobalType(testing::readCorpus("gui.proto"), &p);
  CheckReport rep = checkProgram(p, g);
  REQUIRE(rep.ok);
  PointsTo pts = pointsToAnalysis(p);
  // independent computation: for the one read of U, edges from term(m) for
  // every m in p2 of the read location
  Location resumeX{Location::K::Local, "U", "resume", "x"};
  std::set<std::pair<int, int>> expected;
  for (const auto& m : pts.atLocation.at(resumeX)) {
    for (int put : rep.graph.index.termNodes.at(m)) {
      for (int rd : rep.graph.index.readNodes.at("U")) expected.insert({put, rd});
    }
  }
  CHECK(rep.graph.graph.getEdges == expected);
}

TEST_CASE("verdict is stable across repeated runs") {
  for (int i = 0; i < 3; ++i) {
    CheckReport rep = checkPair("gui.async", "gui.proto");
    CHECK(rep.ok);
    CheckReport bad = checkPair("mutants/gui_wrongpost.async", "gui.proto");
    CHECK(!bad.ok);
  }
}

TEST_CASE("rejected mutants never yield accepted-yet-violating programs") {
  struct M {
    const char* prog;
    const char* proto;
  };
  const M mutants[] = {
      {"mutants/gui_wrongpost.async", "gui.proto"},
      {"mutants/gui_dropget.async", "gui.proto"},
      {"mutants/gui_wrongmain.async", "gui.proto"},
      {"gui.async", "mutants/gui_falsepost.proto"},
      {"gui.async", "mutants/gui_inactive.proto"},
      {"gui.async", "mutants/gui_overlap.proto"},
      {"mutants/branch_swapped.async", "branch.proto"},
      {"mutants/branch_badguard.async", "branch.proto"},
      {"mutants/repeat_badinv.async", "repeat.proto"},
      {"mutants/twostage_badarg.async", "twostage.proto"},
      {"mutants/twostage_reorder.async", "twostage.proto"},
      {"mutants/twostage_noread.async", "mutants/twostage_noread.proto"},
  };
  for (const auto& m : mutants) {
    Program p = testing::corpusProgram(m.prog);
    GlobalType g = parseGlobalType(testing::readCorpus(m.proto), &p);
    CheckReport rep = checkProgram(p, g);
    if (rep.ok) {
      // Soundness contrapositive: accepted programs must still adhere.
      TCP c = translateGlobal(g);
      auto er = enumerateRuns(p, RunLimits{});
      CHECK(er.stuck.empty());
      for (const Trace& tr : er.traces) CHECK(checkTrace(tr, c).ok);
      MESSAGE(m.prog, " accepted; traces verified");
    } else {
      CHECK(!rep.errors.empty());
    }
  }
}

TEST_CASE("order enforced only by a read: removing it breaks admissibility") {
  Program p = testing::corpusProgram("mutants/twostage_noread.async");
  GlobalType g = parseGlobalType(testing::readCorpus("mutants/twostage_noread.proto"), &p);
  CheckReport rep = checkProgram(p, g);
  CHECK(!rep.ok);
  CHECK(!rep.adm.ok);
  CHECK(!rep.adm.unorderedReceives.empty());
}

TEST_CASE("singleton choices need no if") {
  Program p = parseProgram(R"(
object C {
  Int start(Int n) {
    Fut<Int> x = A!acc(n);
    Int r = x.get;
    return r;
  }
}
object A {
  Int acc(Int q) {
    return q + 1;
  }
}
main { C!start(1); }
)");
  GlobalType g = parseGlobalType(R"(
main -> C.start(n) { post: top }
C -[x]-> A.acc(q) { pre: top, post: top }
choice A {
  branch { post: top, reacts: [C { post: top }] } => {
    C reads x
    end
  }
}
)", &p);
  CheckReport rep = checkProgram(p, g);
  for (const auto& e : rep.errors) MESSAGE(e.str());
  CHECK(rep.ok);
}

TEST_CASE("field initializers must be closed") {
  CHECK_THROWS_AS(parseProgram("object A { Int f = g; Int m(Int x) { return x; } } "
                               "main { A!m(0); }"),
                  ParseError);
}

TEST_CASE("nonlinear premises leave the fragment with exit code 2") {
  Program p = parseProgram(
      "object A { Int m(Int n) { Int r = n * n + 1; return r; } } main { A!m(2); }");
  GlobalType g = parseGlobalType("main -> A.m(n) { post: result >= n * n } end", &p);
  CheckReport rep = checkProgram(p, g);
  CHECK(!rep.ok);
  CHECK(rep.unknown);
  CHECK(rep.exitCode() == 2);
  bool fragment = false;
  for (const auto& e : rep.errors)
    fragment = fragment || e.message.find("fragment") != std::string::npos;
  CHECK(fragment);
}

TEST_CASE("same method twice: distinguishable types, but method-level get edges") {
  // The two calls produce two method types with distinguishable
  // preconditions, so the protocol is well-formed. Completion is coarser:
  // term(m) collects every termination node of m, so the read between the
  // activations acquires an edge from the *later* Put as well, and the
  // admissibility check rejects the cycle. Without the read the two
  // receives of B are unordered, which check 2 rejects instead.
  Program p = parseProgram(R"(
object A {
  Unit go(Int n) {
    Fut<Int> x = B!m(1);
    Int r = x.get;
    Fut<Int> y = B!m(2);
    return unit;
  }
}
object B {
  Int m(Int v) {
    return v;
  }
}
main { A!go(0); }
)");
  GlobalType g = parseGlobalType(R"(
main -> A.go(n) { post: top }
A -[x]-> B.m(v) { pre: v == 1, post: result == 1 }
A reads x
A -> B.m(v) { pre: v == 2, post: result >= 1 }
end
)", &p);
  CHECK(wellFormed(g).ok);  // the preconditions are distinguishable
  CheckReport rep = checkProgram(p, g);
  CHECK(!rep.ok);
  CHECK(!rep.adm.ok);
  CHECK(!rep.adm.cycle.empty());
}
