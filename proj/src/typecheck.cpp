#include "asyncst/typecheck.hpp"

#include <algorithm>
#include <functional>

#include "asyncst/constraints.hpp"
#include "asyncst/pretty.hpp"

namespace asyncst {

namespace {

bool containsVisible(const StmtP& s) {
  for (const StmtP& st : seqToList(s)) {
    if (st->as<Stmt::Call>() || st->as<Stmt::Get>() || st->as<Stmt::Return>() ||
        st->as<Stmt::While>())
      return true;
    if (const auto* i = st->as<Stmt::If>()) {
      if (containsVisible(i->thenS) || containsVisible(i->elseS)) return true;
    }
  }
  return false;
}

// Environment for one statement-walk: the formula set Phi and the checked
// history.
struct Env {
  std::vector<FormulaP> phi;
  std::vector<StmtP> history;

  FormulaP phiConj() const { return conjoin(phi); }
  StmtP historySeq() const { return listToSeq(history); }
};

struct MethodChecker {
  const Program& prog;
  const ObjectDecl& obj;
  const MethodDecl& method;
  PostFacts facts;
  FormulaP postG;
  std::vector<CheckIssue>* sink;
  bool* unknownFlag;
  // Read sites matched, in order: p2 sets for the causality completion.
  std::vector<std::set<MethodRef>>* readResolvers;
  const PointsTo* p2;
  std::string lastGetTarget;

  std::string where() const { return obj.name + "." + method.name; }

  void fail(const std::string& rule, const std::string& msg) {
    sink->push_back(CheckIssue{rule, where(), msg});
  }

  // Premise discharge: Phi => [history]goal.
  bool discharge(const Env& env, const FormulaP& goal, const std::string& rule,
                 const std::string& what) {
    FormulaP weakest;
    try {
      weakest = wp(env.historySeq(), goal, facts, obj.name);
    } catch (const InternalError& e) {
      fail(rule, std::string("wp failed for ") + what + ": " + e.what());
      return false;
    }
    FormulaP claim = mkOr(mkNeg(env.phiConj()), weakest);
    ValidityResult r = checkValidity(claim);
    if (r.kind == ValidityResult::K::Valid) return true;
    if (r.kind == ValidityResult::K::Unknown) {
      *unknownFlag = true;
      fail(rule, "validity of " + what + " is outside the decidable fragment (" + r.reason +
                     "): " + prettyFormula(simplify(claim), obj.name));
      return false;
    }
    std::string cex;
    for (const auto& [k, v] : r.counterexample) {
      if (!cex.empty()) cex += ", ";
      cex += k + " = " + valueToString(v);
    }
    fail(rule, what + " not valid: " + prettyFormula(simplify(goal), obj.name) +
                   (cex.empty() ? "" : " (counterexample: " + cex + ")"));
    return false;
  }

  bool pathInfeasible(const Env& env) {
    // Phi itself contradictory: checked without history effects (guards are
    // recorded in Phi after wp over the history at branching points).
    ValidityResult r = checkValidity(mkNeg(env.phiConj()));
    return r.kind == ValidityResult::K::Valid;
  }

  // Absorbs non-communicating statements into the history (T-Assign; an if
  // whose branches are silent is absorbed whole, unless the type item being
  // matched is a choice that needs the if as its selector).
  void absorb(const std::vector<StmtP>& stmts, size_t& si, Env& env, bool absorbIfs) {
    while (si < stmts.size()) {
      const StmtP& s = stmts[si];
      if (s->as<Stmt::Assign>() || s->as<Stmt::Skip>()) {
        env.history.push_back(s);
        ++si;
        continue;
      }
      if (s->as<Stmt::If>() && absorbIfs && !containsVisible(s)) {
        env.history.push_back(s);
        ++si;
        continue;
      }
      break;
    }
  }

  // A feasibility-aware step over an if-statement against a non-choice type
  // suffix: infeasible branches are discharged vacuously; when both branches
  // are feasible each is checked against the same suffix.
  bool checkPlainIf(const Stmt::If& ifs, const LBody& items, size_t ti,
                    const std::vector<StmtP>& stmts, size_t si, Env env) {
    FormulaP g = exprToFormula(ifs.guard, obj.name);
    FormulaP gNow;
    try {
      gNow = wp(env.historySeq(), g, facts, obj.name);
    } catch (const InternalError&) {
      gNow = nullptr;
    }
    auto side = [&](bool thenSide) {
      Env e = env;
      if (gNow) e.phi.push_back(thenSide ? gNow : mkNeg(gNow));
      std::vector<StmtP> rest = seqToList(thenSide ? ifs.thenS : ifs.elseS);
      rest.insert(rest.end(), stmts.begin() + si + 1, stmts.end());
      return std::make_pair(e, rest);
    };
    auto [thenEnv, thenStmts] = side(true);
    auto [elseEnv, elseStmts] = side(false);
    bool thenDead = pathInfeasible(thenEnv);
    bool elseDead = pathInfeasible(elseEnv);
    if (thenDead && elseDead) return true;
    bool ok = true;
    if (!thenDead) ok = checkItems(items, ti, thenStmts, 0, thenEnv) && ok;
    if (!elseDead) ok = checkItems(items, ti, elseStmts, 0, elseEnv) && ok;
    return ok;
  }

  // Partition search shared by T-Select and T-Offer. `checkSide` checks one
  // side of the if against one subset of branches.
  template <class CheckSide>
  bool partitionSearch(size_t branchCount, const std::string& rule, CheckSide checkSide) {
    if (branchCount > 8) {
      fail(rule, "more than 8 branches");
      return false;
    }
    std::vector<CheckIssue> probeSink;
    std::vector<CheckIssue>* realSink = sink;
    int successes = 0;
    uint32_t firstMask = 0;
    for (uint32_t mask = 0; mask < (1u << branchCount); ++mask) {
      probeSink.clear();
      sink = &probeSink;
      bool ok = checkSide(mask);
      sink = realSink;
      if (ok) {
        if (successes == 0) firstMask = mask;
        ++successes;
        if (successes > 1) break;
      }
    }
    if (successes == 0) {
      fail(rule, "no branch partition discharges the premises");
      return false;
    }
    if (successes > 1)
      sink->push_back(CheckIssue{rule, where(), "ambiguous branch partition (warning)"});
    // Re-run the first successful partition against the real sink so its
    // collected obligations (read resolvers) are committed.
    sink = realSink;
    return checkSide(firstMask);
  }

  bool checkItems(const LBody& items, size_t ti, std::vector<StmtP> stmts, size_t si, Env env) {
    while (ti < items.size()) {
      const LItemP& item = items[ti];
      if (item->as<LItem::SkipI>() || item->as<LItem::End>()) {
        ++ti;
        continue;
      }
      bool choiceItem = item->as<LItem::Select>() || item->as<LItem::Offer>();
      absorb(stmts, si, env, /*absorbIfs=*/!choiceItem);
      // A plain if in statement position: only Select/Offer items consume
      // ifs; everything else goes through the feasibility rule.
      if (si < stmts.size()) {
        const auto* ifs = stmts[si]->as<Stmt::If>();
        if (ifs && !choiceItem) {
          LBody rest(items.begin() + ti, items.end());
          return checkPlainIf(*ifs, rest, 0, stmts, si, env);
        }
      }

      if (const auto* send = item->as<LItem::Send>()) {
        if (si >= stmts.size()) {
          fail("T-Call", "missing call to " + send->callee + "." + send->method);
          return false;
        }
        const auto* call = stmts[si]->as<Stmt::Call>();
        if (!call) {
          fail("T-Call", "expected a call to " + send->callee + "." + send->method +
                             ", found: " + prettyStmt(stmts[si]));
          return false;
        }
        if (call->callee != send->callee || call->method != send->method) {
          fail("T-Call", "expected a call to " + send->callee + "." + send->method +
                             ", found a call to " + call->callee + "." + call->method);
          return false;
        }
        if (send->loc) {
          if (!call->target || *call->target != *send->loc || call->fieldTarget) {
            fail("T-Call", "the future must be stored in '" + *send->loc + "'");
            return false;
          }
        }
        // Premise: Phi => [s; call] pre, with the callee's formal names
        // denoting the passed arguments.
        FormulaP pre = send->pre;
        for (size_t a = 0; a < send->params.size() && a < call->args.size(); ++a) {
          pre = substVar(pre, send->params[a], exprToTerm(call->args[a], obj.name));
        }
        Env env2 = env;
        env2.history.push_back(stmts[si]);
        if (!isTop(pre)) {
          if (!discharge(env2, pre, call->target ? "T-Call" : "T-Call-2",
                         "call precondition"))
            return false;
        }
        env = std::move(env2);
        ++si;
        ++ti;
        continue;
      }

      if (const auto* read = item->as<LItem::Read>()) {
        if (si >= stmts.size() || !stmts[si]->as<Stmt::Get>()) {
          fail("T-Get", "expected a get on " + prettyTerm(read->locExpr, obj.name) +
                            (si < stmts.size() ? ", found: " + prettyStmt(stmts[si])
                                               : " but the method ends"));
          return false;
        }
        const auto* get = stmts[si]->as<Stmt::Get>();
        TermP actual = exprToTerm(get->fut, obj.name);
        if (!termEqual(simplifyTerm(actual), simplifyTerm(read->locExpr))) {
          fail("T-Get", "get reads " + prettyTerm(actual, obj.name) + " but the type requires " +
                            prettyTerm(read->locExpr, obj.name));
          return false;
        }
        readResolvers->push_back(p2->forGet(*get));
        lastGetTarget = get->target;
        env.history.push_back(stmts[si]);
        ++si;
        ++ti;
        continue;
      }

      if (const auto* put = item->as<LItem::Put>()) {
        if (si >= stmts.size() || !stmts[si]->as<Stmt::Return>()) {
          fail("T-Return", "expected return" +
                               (si < stmts.size() ? ", found: " + prettyStmt(stmts[si]) : ""));
          return false;
        }
        Env env2 = env;
        env2.history.push_back(stmts[si]);
        if (!isTop(put->post)) {
          if (!discharge(env2, put->post, "T-Return", "postcondition")) return false;
        }
        ++si;
        ++ti;
        if (si < stmts.size()) {
          fail("T-Return", "statements after return");
          return false;
        }
        continue;
      }

      if (const auto* rep = item->as<LItem::Repeat>()) {
        if (si >= stmts.size() || !stmts[si]->as<Stmt::While>()) {
          fail("T-While", "expected a while loop" +
                              (si < stmts.size() ? ", found: " + prettyStmt(stmts[si]) : ""));
          return false;
        }
        const auto* wh = stmts[si]->as<Stmt::While>();
        // Invariant established by the history.
        if (!discharge(env, rep->invariant, "T-While", "loop invariant establishment"))
          return false;
        // Invariant preserved by the body.
        Env bodyEnv;
        bodyEnv.phi = {rep->invariant, postG};
        if (!discharge(Env{bodyEnv.phi, seqToList(wh->body)}, rep->invariant, "T-While",
                       "loop invariant preservation"))
          return false;
        // Body against the inner type, reset environment.
        if (!checkItems(rep->body, 0, seqToList(wh->body), 0, Env{bodyEnv.phi, {}}))
          return false;
        // Continuation under the invariant, reset environment.
        env = Env{{rep->invariant, postG}, {}};
        ++si;
        ++ti;
        continue;
      }

      if (const auto* sel = item->as<LItem::Select>()) {
        if (sel->branches.size() == 1) {
          LBody spliced = sel->branches[0];
          spliced.insert(spliced.end(), items.begin() + ti + 1, items.end());
          return checkItems(spliced, 0, stmts, si, env);
        }
        if (si >= stmts.size() || !stmts[si]->as<Stmt::If>()) {
          fail("T-Select", "expected an if selecting a branch");
          return false;
        }
        const auto* ifs = stmts[si]->as<Stmt::If>();
        FormulaP g = exprToFormula(ifs->guard, obj.name);
        std::vector<StmtP> contStmts(stmts.begin() + si + 1, stmts.end());
        auto checkSide = [&](uint32_t mask) {
          for (int thenSide = 1; thenSide >= 0; --thenSide) {
            std::vector<LBody> chosen;
            for (size_t b = 0; b < sel->branches.size(); ++b) {
              bool inThen = (mask >> b) & 1;
              if ((int)inThen == thenSide) chosen.push_back(sel->branches[b]);
            }
            Env e = env;
            FormulaP gNow;
            try {
              gNow = wp(e.historySeq(), g, facts, obj.name);
            } catch (const InternalError&) {
              gNow = nullptr;
            }
            if (gNow) e.phi.push_back(thenSide ? gNow : mkNeg(gNow));
            std::vector<StmtP> sideStmts = seqToList(thenSide ? ifs->thenS : ifs->elseS);
            sideStmts.insert(sideStmts.end(), contStmts.begin(), contStmts.end());
            if (chosen.empty()) {
              if (!pathInfeasible(e)) return false;
              continue;
            }
            LBody one;
            if (chosen.size() == 1) {
              one = chosen[0];
            } else {
              one.push_back(mkLItem(LItem::Select{chosen}));
            }
            if (!checkItems(one, 0, sideStmts, 0, e)) return false;
          }
          return true;
        };
        return partitionSearch(sel->branches.size(), "T-Select", checkSide);
      }

      if (const auto* off = item->as<LItem::Offer>()) {
        if (off->branches.size() == 1) {
          LBody spliced = off->branches[0].body;
          spliced.insert(spliced.end(), items.begin() + ti + 1, items.end());
          return checkItems(spliced, 0, stmts, si, env);
        }
        if (si >= stmts.size() || !stmts[si]->as<Stmt::If>()) {
          fail("T-Offer", "expected an if branching on the read value" +
                              (si < stmts.size() ? ", found: " + prettyStmt(stmts[si])
                                                 : " but the method ends"));
          return false;
        }
        if (lastGetTarget.empty()) {
          fail("T-Offer", "no preceding get supplies the branching value");
          return false;
        }
        const auto* ifs = stmts[si]->as<Stmt::If>();
        FormulaP g = exprToFormula(ifs->guard, obj.name);
        TermP offerVal = mkVar(lastGetTarget, Sort::Unknown, VarRole::CalleeParam, obj.name);
        std::vector<StmtP> contStmts(stmts.begin() + si + 1, stmts.end());
        auto checkSide = [&](uint32_t mask) {
          for (int thenSide = 1; thenSide >= 0; --thenSide) {
            std::vector<LItem::Offer::Branch> chosen;
            for (size_t b = 0; b < off->branches.size(); ++b) {
              bool inThen = (mask >> b) & 1;
              if ((int)inThen == thenSide) chosen.push_back(off->branches[b]);
            }
            FormulaP sideGuard = thenSide ? g : mkNeg(g);
            // Premises: Phi /\ post(X.m, phi_i) => guard-side for each i.
            for (const auto& br : chosen) {
              FormulaP fact = substResult(br.guard, offerVal);
              FormulaP goal = mkOr(mkNeg(fact), sideGuard);
              if (!discharge(env, goal, "T-Offer", "branch selection premise")) return false;
            }
            if (chosen.empty()) {
              Env e = env;
              FormulaP gNow;
              try {
                gNow = wp(e.historySeq(), sideGuard, facts, obj.name);
              } catch (const InternalError&) {
                gNow = nullptr;
              }
              if (gNow) e.phi.push_back(gNow);
              if (!pathInfeasible(e)) return false;
              continue;
            }
            Env e = env;
            FormulaP gNow;
            try {
              gNow = wp(e.historySeq(), sideGuard, facts, obj.name);
            } catch (const InternalError&) {
              gNow = nullptr;
            }
            if (gNow) e.phi.push_back(gNow);
            std::vector<FormulaP> factDisj;
            for (const auto& br : chosen) factDisj.push_back(substResult(br.guard, offerVal));
            FormulaP disj = factDisj[0];
            for (size_t k = 1; k < factDisj.size(); ++k) disj = mkOr(disj, factDisj[k]);
            e.phi.push_back(disj);
            std::vector<StmtP> sideStmts = seqToList(thenSide ? ifs->thenS : ifs->elseS);
            sideStmts.insert(sideStmts.end(), contStmts.begin(), contStmts.end());
            LBody one;
            if (chosen.size() == 1) {
              one = chosen[0].body;
            } else {
              LItem::Offer sub;
              sub.srcObject = off->srcObject;
              sub.srcMethod = off->srcMethod;
              sub.branches = chosen;
              one.push_back(mkLItem(std::move(sub)));
            }
            if (!checkItems(one, 0, sideStmts, 0, e)) return false;
          }
          return true;
        };
        return partitionSearch(off->branches.size(), "T-Offer", checkSide);
      }

      if (item->as<LItem::Receive>()) {
        fail("T-Object", "nested receive inside a method type");
        return false;
      }
      throw InternalError("unhandled local type item");
    }
    // Items exhausted: only silent statements may remain.
    absorb(stmts, si, env, /*absorbIfs=*/true);
    if (si < stmts.size()) {
      fail("T-Object", "statements beyond the method type: " + prettyStmt(stmts[si]));
      return false;
    }
    return true;
  }
};

}  // namespace

std::vector<std::pair<std::string, LocalType>> methodSegmentsInOrder(const LocalType& obj) {
  std::vector<std::pair<std::string, LocalType>> out;
  // Method types per method, interleaved back into object-type order: walk
  // the methods and merge by first-item position. projectOnMethod yields
  // segments per method in order, so a simple ordered merge by scanning the
  // object type suffices.
  LocalType n = normalizeLocal(obj);
  std::map<std::string, std::vector<LocalType>> perMethod;
  std::map<std::string, size_t> cursor;
  for (const auto& m : methodsOf(n)) {
    perMethod[m] = projectOnMethod(n, m);
    cursor[m] = 0;
  }
  std::function<void(const LBody&)> scan = [&](const LBody& items) {
    for (const auto& it : items) {
      if (const auto* r = it->as<LItem::Receive>()) {
        auto& c = cursor[r->method];
        if (c < perMethod[r->method].size()) out.push_back({r->method, perMethod[r->method][c++]});
      } else if (const auto* rp = it->as<LItem::Repeat>()) {
        scan(rp->body);
      } else if (const auto* sel = it->as<LItem::Select>()) {
        for (const auto& br : sel->branches) scan(br);
      } else if (const auto* offi = it->as<LItem::Offer>()) {
        for (const auto& br : offi->branches) scan(br.body);
      }
    }
  };
  scan(n.items);
  return out;
}

CheckReport checkProgram(const Program& prog, const GlobalType& g) {
  CheckReport rep;

  WfReport wf = wellFormed(g);
  if (!wf.ok) {
    rep.ok = false;
    for (const auto& d : wf.issues)
      rep.errors.push_back(CheckIssue{d.rule, "", d.message});
    return rep;
  }

  // T-Main: roles are exactly the declared objects.
  std::set<std::string> roles = g.roles();
  std::set<std::string> declared;
  for (const auto& o : prog.objects) declared.insert(o.name);
  if (roles != declared) {
    rep.ok = false;
    std::string msg = "roles and declared objects differ: protocol {";
    for (const auto& r : roles) msg += r + " ";
    msg += "} vs program {";
    for (const auto& d : declared) msg += d + " ";
    msg += "}";
    rep.errors.push_back(CheckIssue{"T-Main", "", msg});
    return rep;
  }
  if (prog.mainCallee != g.head.callee || prog.mainMethod != g.head.method) {
    rep.ok = false;
    rep.errors.push_back(CheckIssue{
        "T-Main", "main",
        "main must call " + g.head.callee + "." + g.head.method + " but calls " +
            prog.mainCallee + "." + prog.mainMethod});
    return rep;
  }

  PointsTo p2 = pointsToAnalysis(prog);
  auto postdb = postDatabase(g);
  FormulaP postG = postConjunction(g);
  rep.graph = buildPartialGraph(g);

  std::map<std::string, std::vector<std::set<MethodRef>>> readResolvers;

  for (const auto& X : roles) {
    const ObjectDecl* od = prog.object(X);
    LocalType objType = propagate(projectOnObject(g, X));
    auto segments = methodSegmentsInOrder(objType);
    std::set<std::string> typedMethods;
    for (const auto& [m, seg] : segments) typedMethods.insert(m);
    for (const auto& md : od->methods) {
      if (!typedMethods.count(md.name))
        rep.warnings.push_back(CheckIssue{
            "T-Object", X + "." + md.name, "method is not part of the protocol"});
    }
    for (const auto& [m, seg] : segments) {
      const MethodDecl* md = od->method(m);
      if (!md) {
        rep.ok = false;
        rep.errors.push_back(
            CheckIssue{"T-Object", X + "." + m, "method required by the protocol is missing"});
        continue;
      }
      const auto* head = seg.items.empty() ? nullptr : seg.items.front()->as<LItem::Receive>();
      if (!head) {
        rep.ok = false;
        rep.errors.push_back(CheckIssue{"T-Object", X + "." + m, "method type has no receive"});
        continue;
      }
      PostFacts facts;
      facts.postOf = postdb;
      facts.resolveGet = [&p2](const Stmt::Get& get) { return p2.forGet(get); };
      for (const auto& [t, name] : md->params) facts.localSorts[name] = t.sort();
      for (const StmtP& st : seqToList(md->body)) (void)st;
      std::function<void(const StmtP&)> declSorts = [&](const StmtP& s) {
        for (const StmtP& st : seqToList(s)) {
          if (const auto* a = st->as<Stmt::Assign>()) {
            if (a->declType) facts.localSorts[a->target] = a->declType->sort();
          } else if (const auto* c = st->as<Stmt::Call>()) {
            if (c->declType && c->target) facts.localSorts[*c->target] = c->declType->sort();
          } else if (const auto* gt = st->as<Stmt::Get>()) {
            if (gt->declType) facts.localSorts[gt->target] = gt->declType->sort();
          } else if (const auto* i = st->as<Stmt::If>()) {
            declSorts(i->thenS);
            declSorts(i->elseS);
          } else if (const auto* w = st->as<Stmt::While>()) {
            declSorts(w->body);
          }
        }
      };
      declSorts(md->body);

      MethodChecker mc{prog,  *od,   *md, facts, postG, &rep.errors, &rep.unknown,
                       &readResolvers[X], &p2};
      Env env;
      env.phi = {postG, head->pre};
      LBody rest(seg.items.begin() + 1, seg.items.end());
      if (!mc.checkItems(rest, 0, seqToList(md->body), 0, env)) rep.ok = false;
    }
  }

  if (!rep.ok) return rep;

  // Replicate the last resolver set when branching hoisted several reads
  // into one checked get.
  for (auto& [X, sets] : readResolvers) {
    auto it = rep.graph.index.readNodes.find(X);
    size_t want = it == rep.graph.index.readNodes.end() ? 0 : it->second.size();
    while (sets.size() < want && !sets.empty()) sets.push_back(sets.back());
  }
  auto warns = addGetEdges(rep.graph, readResolvers);
  for (const auto& w : warns)
    rep.warnings.push_back(CheckIssue{
        "T-Get", w.object, "read #" + std::to_string(w.readIndex) + " can never be resolved"});

  rep.adm = admissible(rep.graph.graph);
  if (!rep.adm.ok) {
    rep.ok = false;
    rep.errors.push_back(
        CheckIssue{"T-Main", "", "causality graph not admissible: " + rep.adm.str(rep.graph.graph)});
  }
  return rep;
}

}  // namespace asyncst
