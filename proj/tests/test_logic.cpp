#include <doctest.h>

#include <random>

#include "asyncst/logic.hpp"
#include "asyncst/parse.hpp"
#include "asyncst/pretty.hpp"
#include "helpers.hpp"

using namespace asyncst;

namespace {

SymbolScope ambient() {
  SymbolScope sc;
  sc.names["i"] = {"", VarRole::Unresolved, Sort::Int};
  sc.names["j"] = {"", VarRole::Unresolved, Sort::Int};
  return sc;
}

FormulaP F(const std::string& s) { return parseFormula(s, ambient()); }

bool valid(const FormulaP& f) { return checkValidity(f).kind == ValidityResult::K::Valid; }

}  // namespace

TEST_CASE("weakening reproduces Example 3") {
  FormulaP phi = F("X.fl > 0 && i > X.fl");
  FormulaP expected = F("exists Int a. a > 0 && i > a");
  CHECK(alphaEqual(weaken(phi, "Xp"), expected));
  CHECK(alphaEqual(weaken(phi, "X"), phi));
  CHECK(isObjectFormula(phi, "X"));
  CHECK(!isObjectFormula(phi, "Xp"));
  CHECK(isObjectFormula(F("result > 0"), "Anything"));
  CHECK(alphaEqual(weaken(mkTop(), "X"), mkTop()));
}

TEST_CASE("weakening idempotence") {
  for (const char* s : {"X.fl > 0 && i > X.fl", "X.a == Y.b", "result > 0 || X.f == 1"}) {
    FormulaP w = weaken(F(s), "Z");
    CHECK(alphaEqual(w, weaken(w, "Z")));
  }
}

TEST_CASE("weakening soundness on random small configurations") {
  // eval(phi, cfg) implies eval(weaken(phi, X), cfg).
  std::mt19937_64 rng(11);
  FormulaP phi = F("X.fl > 0 && i > X.fl");
  for (int t = 0; t < 200; ++t) {
    Configuration cfg;
    ObjectState x;
    x.name = "X";
    x.heap["fl"] = (Int)(rng() % 5) - 2;
    cfg.objects.push_back(x);
    EvalFrame frame;
    frame.extra["i"] = (Int)(rng() % 5) - 2;
    bool base = evalFormula(phi, cfg, frame);
    bool weak = evalFormula(weaken(phi, "Other"), cfg, frame);
    if (base) CHECK(weak);
  }
}

TEST_CASE("wp of assignment, skip, and heap store") {
  PostFacts ctx;
  StmtP assign = mkStmt(Stmt::Assign{
      std::nullopt, false, "j",
      mkExpr(Expr::Bin{"*", mkExpr(Expr::VarRef{"i"}), mkExpr(Expr::Lit{(Int)2})})});
  CHECK(alphaEqual(wp(assign, F("j > 0"), ctx, "X"), F("i * 2 > 0")));
  CHECK(alphaEqual(wp(mkStmt(Stmt::Skip{}), F("i > 0"), ctx, "X"), F("i > 0")));

  SymbolScope scU;
  scU.selfObject = "U";
  StmtP store = mkStmt(Stmt::Assign{std::nullopt, true, "state", mkExpr(Expr::FieldRef{"expect"})});
  FormulaP post = parseFormula("self.state == self.expect", scU);
  CHECK(isTop(wp(store, post, ctx, "U")));
}

TEST_CASE("select over store reduces by the axiom") {
  TermP h = mkHeap();
  TermP stored = mkStore(h, "U", "state", mkLit((Int)7));
  CHECK(termEqual(simplifyTerm(mkSelect(stored, "U", "state")), mkLit((Int)7)));
  // a different location commutes past the store
  CHECK(termEqual(simplifyTerm(mkSelect(stored, "U", "expect")), mkSelect(h, "U", "expect")));
}

TEST_CASE("wp of store/select agrees with enumerating all stores") {
  // Oracle: enumerate all heaps over a 2-value field domain and compare
  // truth tables of wp(s, post) against post after executing s.
  PostFacts ctx;
  StmtP s = mkStmt(Stmt::Assign{std::nullopt, true, "state", mkExpr(Expr::FieldRef{"expect"})});
  SymbolScope scU;
  scU.selfObject = "U";
  FormulaP post = parseFormula("self.state == self.expect", scU);
  FormulaP pre = wp(s, post, ctx, "U");
  for (Int st : {0, 1}) {
    for (Int ex : {0, 1}) {
      Configuration cfg;
      ObjectState u;
      u.name = "U";
      u.heap["state"] = st;
      u.heap["expect"] = ex;
      cfg.objects.push_back(u);
      EvalFrame frame;
      frame.selfObject = "U";
      bool before = evalFormula(pre, cfg, frame);
      Configuration after = cfg;
      after.object("U")->heap["state"] = ex;  // execute the assignment
      bool result = evalFormula(post, after, frame);
      CHECK(before == result);
    }
  }
}

TEST_CASE("validity: Example 2, distinguishability, counterexamples") {
  FormulaP ex2 = mkOr(mkNeg(F("exists Int a. a > 0 && i > a")), F("i * 2 > 0"));
  CHECK(valid(ex2));
  CHECK(valid(F("!(result == -1 && result > 0)")));
  ValidityResult r = checkValidity(F("i > 0"));
  REQUIRE(r.kind == ValidityResult::K::NotValid);
  auto it = r.counterexample.find("i");
  REQUIRE(it != r.counterexample.end());
  CHECK(std::get<Int>(it->second) <= 0);
}

TEST_CASE("validity handles finite-character sorts") {
  CHECK(valid(F("exists List l. l != Nil")));
  CHECK(valid(F("exists Bool b. b")));
  CHECK(!valid(F("exists Fut f. exists Fut g. f == g && !(f == g)")));
  // forall via negation: a future differs from some future
  SymbolScope sc;
  sc.names["x"] = {"", VarRole::Unresolved, Sort::Fut};
  CHECK(valid(parseFormula("exists Fut a. !(x == a)", sc)));
  // ... but not from every future
  CHECK(!valid(parseFormula("!(exists Fut a. x == a)", sc)));
}

TEST_CASE("uninterpreted predicates yield Unknown") {
  FormulaP p = mkPred("mystery", {mkVar("i", Sort::Int, VarRole::Unresolved, "")});
  CHECK(checkValidity(p).kind == ValidityResult::K::Unknown);
}

TEST_CASE("validity never accepts a formula with a small counterexample") {
  // Soundness smoke test: random formulas over i, j in {-2..2}; whenever
  // brute force finds a countermodel, check_validity must not say Valid.
  std::mt19937_64 rng(23);
  SymbolScope sc = ambient();
  auto randTerm = [&](auto self, int depth) -> TermP {
    switch (rng() % (depth > 0 ? 4 : 2)) {
      case 0: return mkVar(rng() % 2 ? "i" : "j", Sort::Int, VarRole::Unresolved, "");
      case 1: return mkLit((Int)(rng() % 5) - 2);
      case 2: return mkFn("+", {self(self, depth - 1), self(self, depth - 1)});
      default: return mkFn("*", {mkLit((Int)(rng() % 3) - 1), self(self, depth - 1)});
    }
  };
  auto randFormula = [&](auto self, int depth) -> FormulaP {
    if (depth == 0 || rng() % 3 == 0) {
      auto op = rng() % 3;
      TermP l = randTerm(randTerm, 1), r = randTerm(randTerm, 1);
      if (op == 0) return mkEq(l, r);
      if (op == 1) return mkCmp(Formula::Cmp::Op::Geq, l, r);
      return mkCmp(Formula::Cmp::Op::Gt, l, r);
    }
    switch (rng() % 3) {
      case 0: return mkNeg(self(self, depth - 1));
      case 1: return mkAnd(self(self, depth - 1), self(self, depth - 1));
      default: return mkOr(self(self, depth - 1), self(self, depth - 1));
    }
  };
  Configuration cfg;  // empty: variables come from the frame
  for (int t = 0; t < 300; ++t) {
    FormulaP f = randFormula(randFormula, 2);
    bool hasCex = false;
    for (Int i = -2; i <= 2 && !hasCex; ++i) {
      for (Int j = -2; j <= 2 && !hasCex; ++j) {
        EvalFrame frame;
        frame.extra["i"] = i;
        frame.extra["j"] = j;
        if (!evalFormula(f, cfg, frame)) hasCex = true;
      }
    }
    if (hasCex) CHECK(checkValidity(f).kind != ValidityResult::K::Valid);
  }
}

TEST_CASE("eval_formula quantifies futures over the configuration") {
  Configuration cfg;
  ProcessState p;
  p.object = "A";
  p.fut = FutId{1};
  p.method = "m";
  p.status = ProcessState::St::Running;
  p.store["x"] = FutId{1};
  cfg.processes.push_back(p);
  ObjectState a;
  a.name = "A";
  cfg.objects.push_back(a);
  EvalFrame frame;
  frame.proc = &cfg.processes[0];
  SymbolScope sc;
  sc.names["x"] = {"A", VarRole::CalleeParam, Sort::Fut};
  CHECK(evalFormula(parseFormula("exists Fut f. x == f", sc), cfg, frame));
  CHECK_THROWS_AS(evalFormula(parseFormula("zz > 0", sc), cfg, frame), EvalError);
}

TEST_CASE("eval_formula on heap state") {
  Configuration cfg;
  ObjectState u;
  u.name = "U";
  u.heap["state"] = (Int)1;
  u.heap["expect"] = (Int)1;
  cfg.objects.push_back(u);
  EvalFrame frame;
  frame.selfObject = "U";
  SymbolScope sc;
  sc.selfObject = "U";
  CHECK(evalFormula(parseFormula("self.state == self.expect", sc), cfg, frame));
  CHECK(evalFormula(mkTop(), cfg, frame));
}
