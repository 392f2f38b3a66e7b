// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "asyncst/causality.hpp"
#include "asyncst/constraints.hpp"
#include "asyncst/logic.hpp"
#include "asyncst/parse.hpp"
#include "asyncst/pretty.hpp"
#include "asyncst/projection.hpp"
#include "asyncst/runtime.hpp"
#include "asyncst/typecheck.hpp"
#include "helpers.hpp"

using namespace asyncst;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool ok, Clock::time_point t0,
            const std::string& detail = "") {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << " (" << ms << " ms) — "
            << what;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << "\n";
  if (!ok) ++failures;
}

Program prog(const std::string& n) { return testing::corpusProgram(n); }
GlobalType proto(const std::string& n, const Program& p) {
  return parseGlobalType(testing::readCorpus(n), &p);
}

// --------------------------------------------------------------------------
// 1. Running example end-to-end with golden projections.
// --------------------------------------------------------------------------
void criterion1() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  Program p = prog("gui.async");
  GlobalType g = proto("gui.proto", p);
  CheckReport rep = checkProgram(p, g);
  if (!rep.ok) {
    ok = false;
    detail = "check failed";
  }
  LocalType step1 = projectOnObject(g, "U");
  LocalType golden1 = parseLocalType(
      "start?<top>. I!cmp<top>. Put<self.state == self.expect>. "
      "resume?<exists Fut f. x == f>. Read<x>. Put<result > 0>. end",
      "U");
  if (!localEqual(step1, golden1)) {
    ok = false;
    detail += " step1 mismatch: " + prettyLocal(step1);
  }
  LocalType step2 = propagate(step1);
  LocalType golden2 = parseLocalType(
      "start?<top>. I!cmp<top>. Put<self.state == self.expect>. "
      "resume?<exists Fut f. x == f && self.state == self.expect>. Read<x>. "
      "Put<result > 0>. end",
      "U");
  if (!localEqual(step2, golden2)) {
    ok = false;
    detail += " step2 mismatch: " + prettyLocal(step2);
  }
  auto resume = projectOnMethod(step2, "resume");
  LocalType golden3 = parseLocalType(
      "resume?<exists Fut f. x == f && self.state == self.expect>. Read<x>. Put<result > 0>",
      "U");
  if (resume.size() != 1 || !localEqual(resume[0], golden3)) {
    ok = false;
    detail += " step3 mismatch";
  }
  report(1, "running example: check + Step 1-3 goldens (alpha-blind)", ok, t0, detail);
}

// --------------------------------------------------------------------------
// 2. Causality: completed gui graph; mutual-get rejection.
// --------------------------------------------------------------------------
void criterion2() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  Program p = prog("gui.async");
  GlobalType g = proto("gui.proto", p);
  CheckReport rep = checkProgram(p, g);
  if (!rep.ok || !rep.adm.ok) ok = false;
  if (rep.graph.graph.indirect.size() != 1) {
    ok = false;
    detail += "dotted=" + std::to_string(rep.graph.graph.indirect.size());
  }
  if (rep.graph.graph.getEdges.size() != 1) {
    ok = false;
    detail += " gray=" + std::to_string(rep.graph.graph.getEdges.size());
  } else {
    auto [a, b] = *rep.graph.graph.getEdges.begin();
    const CNode& from = rep.graph.graph.nodes[a];
    const CNode& to = rep.graph.graph.nodes[b];
    if (!(from.object == "S" && from.kind == CNode::K::Put && from.method == "cmp" &&
          to.object == "U" && to.kind == CNode::K::Read)) {
      ok = false;
      detail += " gray edge endpoints wrong";
    }
  }
  // mutual-get construction
  GlobalType mg = parseGlobalType(R"(
main -> O.go(n) { post: top }
O -[x]-> A.m(pa) { pre: top, post: top }
O -[y]-> B.n(pb) { pre: top, post: top }
A reads pa
B reads pb
end
)");
  BuiltGraph bg = buildPartialGraph(mg);
  std::map<std::string, std::vector<std::set<MethodRef>>> rr;
  rr["A"] = {{{"B", "n"}}};
  rr["B"] = {{{"A", "m"}}};
  addGetEdges(bg, rr);
  AdmissibilityReport adm = admissible(bg.graph);
  if (adm.ok || adm.cycle.size() != 4) {
    ok = false;
    detail += " mutual-get cycle len=" + std::to_string(adm.cycle.size());
  }
  report(2, "causality: gui graph admissible (1 dotted, 1 gray), mutual-get 4-cycle", ok, t0,
         detail);
}

// --------------------------------------------------------------------------
// 3. Exhaustive adherence of the corpus.
// --------------------------------------------------------------------------
void criterion3() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  const char* pairs[][2] = {{"gui.async", "gui.proto"},
                            {"repeat.async", "repeat.proto"},
                            {"branch.async", "branch.proto"},
                            {"branch_deny.async", "branch.proto"},
                            {"relay.async", "relay.proto"},
                            {"twostage.async", "twostage.proto"}};
  int total = 0;
  for (const auto& [pr, pt] : pairs) {
    Program p = prog(pr);
    GlobalType g = proto(pt, p);
    CheckReport rep = checkProgram(p, g);
    if (!rep.ok) {
      ok = false;
      detail += std::string(pr) + " not well-typed; ";
      continue;
    }
    EnumerateResult er = enumerateRuns(p, RunLimits{500, 4});
    if (!er.stuck.empty()) {
      ok = false;
      detail += std::string(pr) + " stuck=" + std::to_string(er.stuck.size()) + "; ";
    }
    TCP c = translateGlobal(g);
    for (const Trace& tr : er.traces) {
      ++total;
      auto res = checkTrace(tr, c);
      if (!res.ok) {
        ok = false;
        detail += std::string(pr) + " violates at " + res.refutedLabel + "; ";
        break;
      }
    }
  }
  report(3, "adherence: 6 programs, exhaustive schedules, 100% of traces satisfy C(G)", ok,
         t0, detail.empty() ? std::to_string(total) + " traces" : detail);
}

// --------------------------------------------------------------------------
// 4. Rejection suite.
// --------------------------------------------------------------------------
void criterion4() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  const char* mutants[][2] = {
      {"mutants/twostage_reorder.async", "twostage.proto"},
      {"mutants/gui_wrongpost.async", "gui.proto"},
      {"gui.async", "mutants/gui_falsepost.proto"},
      {"mutants/gui_dropget.async", "gui.proto"},
      {"mutants/gui_wrongmain.async", "gui.proto"},
      {"mutants/branch_badguard.async", "branch.proto"},
      {"mutants/branch_swapped.async", "branch.proto"},
      {"mutants/repeat_badinv.async", "repeat.proto"},
      {"gui.async", "mutants/gui_inactive.proto"},
      {"gui.async", "mutants/gui_overlap.proto"},
      {"mutants/twostage_badarg.async", "twostage.proto"},
      {"mutants/twostage_noread.async", "mutants/twostage_noread.proto"},
  };
  int rejected = 0, verified = 0;
  for (const auto& [pr, pt] : mutants) {
    Program p = prog(pr);
    GlobalType g = proto(pt, p);
    CheckReport rep = checkProgram(p, g);
    if (!rep.ok) {
      ++rejected;
      continue;
    }
    // accepted: every trace must still satisfy the constraint
    EnumerateResult er = enumerateRuns(p, RunLimits{500, 4});
    TCP c = translateGlobal(g);
    bool adheres = er.stuck.empty();
    for (const Trace& tr : er.traces) adheres = adheres && checkTrace(tr, c).ok;
    if (adheres) {
      ++verified;
    } else {
      ok = false;
      detail += std::string(pr) + " accepted yet violating; ";
    }
  }
  report(4, "rejection suite: 12 mutants, zero accepted-yet-violating", ok, t0,
         "rejected=" + std::to_string(rejected) + " accepted-adhering=" +
             std::to_string(verified) + (detail.empty() ? "" : "; " + detail));
}

// --------------------------------------------------------------------------
// 5. Logic properties.
// --------------------------------------------------------------------------
Value execExpr(const ExprP& e, std::map<std::string, Value>& store) {
  return evalExpr(e, store, nullptr);
}

void execStraightLine(const StmtP& s, std::map<std::string, Value>& store) {
  for (const StmtP& st : seqToList(s)) {
    if (const auto* a = st->as<Stmt::Assign>()) {
      store[a->target] = execExpr(a->expr, store);
    } else if (const auto* i = st->as<Stmt::If>()) {
      if (std::get<bool>(execExpr(i->guard, store))) execStraightLine(i->thenS, store);
      else execStraightLine(i->elseS, store);
    }
  }
}

void criterion5() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  SymbolScope sc;
  sc.names["i"] = {"", VarRole::Unresolved, Sort::Int};
  // Example 2
  FormulaP ex2 = mkOr(mkNeg(parseFormula("exists Int a. a > 0 && i > a", sc)),
                      parseFormula("i * 2 > 0", sc));
  if (!checkValidity(ex2).valid()) {
    ok = false;
    detail += "Example 2 not Valid; ";
  }
  // Example 3 exact weakening
  FormulaP phi = parseFormula("X.fl > 0 && i > X.fl", sc);
  if (!alphaEqual(weaken(phi, "Xp"), parseFormula("exists Int a. a > 0 && i > a", sc))) {
    ok = false;
    detail += "Example 3 weakening mismatch; ";
  }
  // branch distinguishability
  if (!checkValidity(parseFormula("!(result == -1 && result > 0)", sc)).valid()) {
    ok = false;
    detail += "distinguishability not Valid; ";
  }
  // wp vs interpreter over all stores in {-2..2}^3
  std::mt19937_64 rng(42);
  const char* vars[] = {"a", "b", "c"};
  auto rv = [&]() { return mkExpr(Expr::VarRef{vars[rng() % 3]}); };
  auto rlit = [&]() { return mkExpr(Expr::Lit{(Int)(rng() % 5) - 2}); };
  auto rterm = [&]() -> ExprP {
    switch (rng() % 4) {
      case 0: return rv();
      case 1: return rlit();
      case 2: return mkExpr(Expr::Bin{"+", rv(), rlit()});
      default: return mkExpr(Expr::Bin{"*", rv(), rlit()});
    }
  };
  auto rguard = [&]() -> ExprP {
    const char* ops[] = {"==", "<", ">", "<=", ">=", "!="};
    return mkExpr(Expr::Bin{ops[rng() % 6], rv(), rterm()});
  };
  int mismatches = 0;
  PostFacts noFacts;
  for (int t = 0; t < 50; ++t) {
    std::vector<StmtP> stmts;
    int len = 1 + (int)(rng() % 5);
    for (int k = 0; k < len; ++k) {
      if (rng() % 4 == 0) {
        StmtP thenS = mkStmt(Stmt::Assign{std::nullopt, false, vars[rng() % 3], rterm()});
        StmtP elseS = mkStmt(Stmt::Assign{std::nullopt, false, vars[rng() % 3], rterm()});
        stmts.push_back(mkStmt(Stmt::If{rguard(), thenS, elseS}));
      } else {
        stmts.push_back(mkStmt(Stmt::Assign{std::nullopt, false, vars[rng() % 3], rterm()}));
      }
    }
    StmtP s = listToSeq(stmts);
    FormulaP post = exprToFormula(rguard(), "X");
    FormulaP pre = wp(s, post, noFacts, "X");
    Configuration emptyCfg;
    for (Int a = -2; a <= 2; ++a)
      for (Int b = -2; b <= 2; ++b)
        for (Int c = -2; c <= 2; ++c) {
          std::map<std::string, Value> store{{"a", a}, {"b", b}, {"c", c}};
          EvalFrame frame;
          frame.extra = store;
          bool before = evalFormula(pre, emptyCfg, frame);
          auto after = store;
          execStraightLine(s, after);
          EvalFrame frame2;
          frame2.extra = after;
          bool result = evalFormula(post, emptyCfg, frame2);
          if (before && !result) ++mismatches;
        }
  }
  if (mismatches) {
    ok = false;
    detail += "wp oracle mismatches=" + std::to_string(mismatches);
  }
  report(5, "logic: Example 2 Valid, Example 3 exact, distinguishability, wp oracle", ok, t0,
         detail);
}

// --------------------------------------------------------------------------
// 6. Kleene segmentation vs brute-force subsets.
// --------------------------------------------------------------------------
void criterion6() {
  auto t0 = Clock::now();
  bool ok = true;
  int agree = 0;
  std::mt19937_64 rng(77);
  Program p = prog("repeat.async");
  RunResult r = run(p, SchedulerKind::Fifo, 0, RunLimits{});
  Trace base = r.trace;
  SymbolScope sc;
  FormulaP inv = parseFormula("U.expect != Nil", sc);
  auto randConstraint = [&](auto self, int depth) -> TCP {
    if (depth == 0 || rng() % 2 == 0) {
      EventPattern pat;
      int k = (int)(rng() % 4);
      pat.kind = k == 0   ? Event::K::Invocation
                 : k == 1 ? Event::K::InvocationReaction
                 : k == 2 ? Event::K::Resolving
                          : Event::K::Fetch;
      std::string v = "q" + std::to_string(rng() % 2);
      if (rng() % 2) return mkTC(TC::ExistsPos{v, true, mkTC(TC::EventMatch{v, pat})});
      return mkTC(TC::ForallPos{v, true, mkTC(TC::Not{mkTC(TC::EventMatch{v, pat})})});
    }
    return rng() % 2
               ? mkTC(TC::And{{self(self, depth - 1), self(self, depth - 1)}})
               : mkTC(TC::Or{{self(self, depth - 1), self(self, depth - 1)}});
  };
  for (int t = 0; t < 200; ++t) {
    int lo = (int)(rng() % base.size());
    int hi = std::min<int>((int)base.size(), lo + (int)(rng() % 10));
    TC::ExistsSet node{"B", inv, randConstraint(randConstraint, 3)};
    TCP wrapped = mkTC(TC::ExistsSet{node.setVar, node.invariant, node.segment});
    bool fast = evalConstraintWindow(base, wrapped, lo, hi);
    bool brute = bruteForceExistsSet(base, node, lo, hi);
    if (fast == brute) ++agree;
  }
  ok = agree == 200;
  report(6, "Kleene segmentation vs subset enumeration on 200 instances", ok, t0,
         std::to_string(agree) + "/200 agree");
}

// --------------------------------------------------------------------------
// 7. Points-to soundness over all corpus traces.
// --------------------------------------------------------------------------
void criterion7() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  int checkedFetches = 0;
  for (const char* name : {"gui.async", "repeat.async", "branch.async", "branch_deny.async",
                           "relay.async", "twostage.async"}) {
    Program p = prog(name);
    PointsTo pts = pointsToAnalysis(p);
    EnumerateResult er = enumerateRuns(p, RunLimits{500, 4});
    for (const Trace& tr : er.traces) {
      std::map<int, MethodRef> resolverOf;
      for (const auto& tp : tr)
        if (tp.ev.kind == Event::K::Resolving)
          resolverOf[tp.ev.fut.id] = {tp.ev.object, tp.ev.method};
      for (const auto& tp : tr) {
        if (tp.ev.kind != Event::K::Fetch) continue;
        const ObjectState* o = tp.config.object(tp.ev.object);
        if (!o || !o->active) continue;
        const ProcessState* reader = tp.config.process(*o->active);
        std::vector<StmtP> list = seqToList(reader->rest);
        const auto* g = list.empty() ? nullptr : list[0]->as<Stmt::Get>();
        if (!g) continue;
        ++checkedFetches;
        auto set = pts.forGet(*g);
        if (!set.count(resolverOf.at(tp.ev.fut.id))) {
          ok = false;
          detail += std::string(name) + " misses a resolver; ";
        }
      }
    }
  }
  report(7, "points-to soundness: every actual resolver is in the static set", ok, t0,
         std::to_string(checkedFetches) + " fetches checked" + (detail.empty() ? "" : "; " + detail));
}

// --------------------------------------------------------------------------
// 8. Parser round-trip + fuzz.
// --------------------------------------------------------------------------
Program randomProgram(std::mt19937_64& rng) {
  std::ostringstream os;
  int nObjects = 1 + (int)(rng() % 3);
  std::vector<std::string> objNames;
  for (int o = 0; o < nObjects; ++o) objNames.push_back("Ob" + std::to_string(o));
  for (int o = 0; o < nObjects; ++o) {
    os << "object " << objNames[o] << " {\n";
    int nFields = (int)(rng() % 3);
    for (int f = 0; f < nFields; ++f)
      os << "  Int fld" << f << " = " << (Int)(rng() % 7) - 3 << ";\n";
    int nMethods = 1 + (int)(rng() % 3);
    for (int m = 0; m < nMethods; ++m) {
      os << "  Int met" << m << "(Int p0, Int p1) {\n";
      int nStmts = (int)(rng() % 4);
      for (int s = 0; s < nStmts; ++s) {
        switch (rng() % 4) {
          case 0: os << "    Int v" << s << " = p0 + " << (Int)(rng() % 5) << ";\n"; break;
          case 1: os << "    skip;\n"; break;
          case 2:
            os << "    if (p0 > " << (Int)(rng() % 3) << ") { p1 = p1 + 1; } else { p1 = 0; }\n";
            break;
          default:
            if (nFields > 0) os << "    this.fld0 = p1 * 2;\n";
            else os << "    p0 = p1 - 1;\n";
        }
      }
      os << "    return p0 + p1;\n  }\n";
    }
    os << "}\n";
  }
  os << "main { " << objNames[0] << "!met0(1, 2); }\n";
  return parseProgram(os.str());
}

void criterion8() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  // corpus round-trip
  for (const char* f : {"gui.async", "repeat.async", "branch.async", "branch_deny.async",
                        "relay.async", "twostage.async", "deadlock.async"}) {
    Program p1 = prog(f);
    Program p2 = parseProgram(prettyProgram(p1));
    if (prettyProgram(p1) != prettyProgram(p2)) {
      ok = false;
      detail += std::string(f) + " round-trip; ";
    }
  }
  // 1000 generated programs
  std::mt19937_64 rng(2026);
  for (int t = 0; t < 1000; ++t) {
    Program p1 = randomProgram(rng);
    Program p2 = parseProgram(prettyProgram(p1));
    if (prettyProgram(p1) != prettyProgram(p2)) {
      ok = false;
      detail += "generated #" + std::to_string(t) + "; ";
      break;
    }
  }
  // 10000 random byte strings: no crash, only ParseError
  for (int t = 0; t < 10000; ++t) {
    std::string junk;
    int len = (int)(rng() % 80);
    for (int k = 0; k < len; ++k) junk.push_back((char)(rng() % 256));
    try {
      parseProgram(junk);
    } catch (const ParseError&) {
    } catch (...) {
      ok = false;
      detail += "non-ParseError escape on fuzz #" + std::to_string(t) + "; ";
      break;
    }
    try {
      parseGlobalType(junk);
    } catch (const ParseError&) {
    } catch (...) {
      ok = false;
      detail += "protocol fuzz escape #" + std::to_string(t) + "; ";
      break;
    }
  }
  report(8, "parser: corpus + 1000 generated round-trips, 10000-input fuzz", ok, t0, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures == 0) {
    std::cout << "all acceptance criteria pass\n";
    return 0;
  }
  std::cout << failures << " criteria failed\n";
  return 1;
}
