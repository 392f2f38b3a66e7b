#include "asyncst/projection.hpp"

#include <algorithm>
#include <functional>

#include "asyncst/pretty.hpp"

namespace asyncst {

namespace {

// Objects called (as callee) anywhere inside a body.
void calleesOf(const GBody& items, std::set<std::string>& out) {
  for (const auto& it : items) {
    if (const auto* c = it->as<GItem::Call>()) out.insert(c->callee);
    else if (const auto* rp = it->as<GItem::Repeat>()) calleesOf(rp->body, out);
    else if (const auto* ch = it->as<GItem::Choice>()) {
      for (const auto& br : ch->branches) calleesOf(br.body, out);
    }
  }
}

bool rcv(const std::string& X, const GBody& items) {
  std::set<std::string> cs;
  calleesOf(items, cs);
  return cs.count(X) > 0;
}

struct Projector {
  const std::string& X;

  LBody project(const GBody& items, ActiveMap ac) {
    LBody out;
    for (size_t idx = 0; idx < items.size(); ++idx) {
      const GItemP& it = items[idx];
      if (const auto* c = it->as<GItem::Call>()) {
        if (c->caller == c->callee)
          throw ProjectionUndefined("projection rule 1", "self-call on " + c->caller, it->loc);
        if (c->caller == X) {
          if (!ac.count(X))
            throw ProjectionUndefined("projection rule 1",
                                      "caller " + X + " is inactive at call to " + c->callee +
                                          "." + c->method,
                                      it->loc);
          std::set<std::string> keep(c->params.begin(), c->params.end());
          if (!alphaEqual(c->pre, weaken(c->pre, X, keep)))
            throw ProjectionUndefined(
                "projection rule 1",
                "precondition of " + c->callee + "." + c->method +
                    " is not provable by caller " + X + ": " + prettyFormula(c->pre),
                it->loc);
          out.push_back(mkLItem(LItem::Send{c->callee, c->loc, c->method, c->params, c->pre}));
        } else if (c->callee == X) {
          if (ac.count(X)) out.push_back(mkLItem(LItem::Put{ac.at(X).post}));
          out.push_back(mkLItem(LItem::Receive{c->method, weaken(c->pre, X)}));
        }
        ac[c->callee] = ActiveEntry{c->post, c->method};
        continue;
      }
      if (const auto* r = it->as<GItem::Read>()) {
        if (r->object == X) {
          if (!ac.count(X))
            throw ProjectionUndefined("projection rule glGet",
                                      "reader " + X + " is inactive", it->loc);
          out.push_back(mkLItem(LItem::Read{r->locExpr}));
        }
        continue;
      }
      if (const auto* rp = it->as<GItem::Repeat>()) {
        if (!csCheck(rp->invariant))
          throw ProjectionUndefined("projection rule loop (cs)",
                                    "invariant ties several heaps together: " +
                                        prettyFormula(rp->invariant),
                                    it->loc);
        LBody inner = normalizeBody(project(rp->body, ac));
        stripEnd(inner);
        if (inner.empty()) {
          // Object does not participate in the repetition.
        } else if (rcv(X, rp->body)) {
          if (!ac.count(X))
            throw ProjectionUndefined("projection rule loop",
                                      X + " is called in a repetition but inactive before it",
                                      it->loc);
          out.push_back(mkLItem(LItem::Put{ac.at(X).post}));
          ActiveMap acLoop = ac;
          acLoop.erase(X);
          GBody withEnd = rp->body;
          withEnd.push_back(mkGItem(GItem::End{}, it->loc));
          LBody closed = normalizeBody(project(withEnd, acLoop));
          stripEnd(closed);
          out.push_back(mkLItem(LItem::Repeat{closed, weaken(rp->invariant, X)}));
        } else {
          out.push_back(mkLItem(LItem::Repeat{inner, weaken(rp->invariant, X)}));
        }
        // A method activated inside a Kleene block terminates inside it and
        // zero-iteration runs never activate it: inactive afterwards.
        std::set<std::string> called;
        calleesOf(rp->body, called);
        for (const auto& y : called) ac.erase(y);
        continue;
      }
      if (const auto* ch = it->as<GItem::Choice>()) {
        projectChoice(*ch, ac, it->loc, out);
        return out;  // choice is terminal
      }
      if (it->as<GItem::End>()) {
        if (ac.count(X)) out.push_back(mkLItem(LItem::Put{ac.at(X).post}));
        out.push_back(mkLItem(LItem::End{}));
        return out;
      }
    }
    return out;
  }

  static void stripEnd(LBody& b) {
    while (!b.empty() && b.back()->as<LItem::End>()) b.pop_back();
  }

  void projectChoice(const GItem::Choice& ch, ActiveMap ac, SrcLoc loc, LBody& out) {
    // allAct: chooser and every reactor active, same reactor set per branch.
    std::set<std::string> reactors;
    for (size_t i = 0; i < ch.branches.size(); ++i) {
      std::set<std::string> rs;
      for (const auto& [obj, f] : ch.branches[i].reacts) rs.insert(obj);
      if (i == 0) reactors = rs;
      else if (rs != reactors)
        throw ProjectionUndefined("projection rule branching",
                                  "branches react on different objects", loc);
    }
    bool involved = (ch.chooser == X) || reactors.count(X);
    bool allAct = ac.count(ch.chooser) > 0;
    for (const auto& r : reactors) allAct = allAct && ac.count(r) > 0;
    if (involved && !allAct)
      throw ProjectionUndefined("projection rule branching",
                                "chooser or reactor inactive at choice", loc);

    auto acFor = [&](const GItem::Choice::Branch& br) {
      ActiveMap acc = ac;
      ActiveEntry& chEntry = acc[ch.chooser];
      chEntry.post = conjoinScoped(chEntry.post, weaken(br.post, ch.chooser));
      for (const auto& [obj, f] : br.reacts) {
        ActiveEntry& e = acc[obj];
        e.post = conjoinScoped(e.post, weaken(f, obj));
      }
      return acc;
    };

    if (ch.chooser == X) {
      LItem::Select sel;
      for (const auto& br : ch.branches) sel.branches.push_back(project(br.body, acFor(br)));
      out.push_back(mkLItem(std::move(sel)));
      return;
    }
    if (reactors.count(X)) {
      LItem::Offer off;
      off.srcObject = ch.chooser;
      off.srcMethod = ac.at(ch.chooser).method;
      for (const auto& br : ch.branches) {
        off.branches.push_back(LItem::Offer::Branch{weaken(br.post, X),
                                                    project(br.body, acFor(br))});
      }
      out.push_back(mkLItem(std::move(off)));
      return;
    }
    if (ac.count(X))
      throw ProjectionUndefined("projection rule branching",
                                X + " is active but not mentioned at choice", loc);
    std::vector<LBody> projected;
    for (const auto& br : ch.branches)
      projected.push_back(normalizeBody(project(br.body, acFor(br))));
    bool allEqual = true;
    for (size_t i = 1; i < projected.size(); ++i)
      if (!lbodyEqual(projected[0], projected[i])) allEqual = false;
    if (allEqual) {
      for (auto& itp : projected[0]) out.push_back(itp);
      return;
    }
    int nonSkip = -1;
    for (size_t i = 0; i < projected.size(); ++i) {
      LBody b = projected[i];
      stripEnd(b);
      if (!b.empty()) {
        if (nonSkip >= 0)
          throw ProjectionUndefined("projection rule branching",
                                    X + " behaves differently across branches", loc);
        nonSkip = (int)i;
      }
    }
    if (nonSkip < 0) {
      out.push_back(mkLItem(LItem::End{}));
      return;
    }
    for (auto& itp : projected[nonSkip]) out.push_back(itp);
  }
};

}  // namespace

LocalType projectOnObject(const GlobalType& g, const std::string& X) {
  Projector proj{X};
  LBody out;
  ActiveMap ac;
  if (g.head.callee == X) {
    out.push_back(mkLItem(LItem::Receive{g.head.method, mkTop()}));
  }
  ac[g.head.callee] = ActiveEntry{g.head.post, g.head.method};
  LBody rest = proj.project(g.body, ac);
  out.insert(out.end(), rest.begin(), rest.end());
  LocalType t{X, std::move(out)};
  LocalType n = normalizeLocal(t);
  // Syntactic restriction: an object type never starts with a repetition.
  if (!n.items.empty() && n.items.front()->as<LItem::Repeat>())
    throw ProjectionUndefined("projection rule loop",
                              "object type of " + X + " would start with a repetition");
  return n;
}

// ---------------------------------------------------------------------------
// Propagation.
// ---------------------------------------------------------------------------
namespace {

// Splits a formula into its existential prefix and top-level conjuncts.
void topConjuncts(const FormulaP& f, std::vector<FormulaP>& out) {
  if (const auto* a = f->as<Formula::And>()) {
    topConjuncts(a->l, out);
    topConjuncts(a->r, out);
    return;
  }
  out.push_back(f);
}

bool containsConjunct(const FormulaP& host, const FormulaP& c) {
  FormulaP body = host;
  while (const auto* ex = body->as<Formula::Exists>()) body = ex->body;
  std::vector<FormulaP> cs;
  topConjuncts(body, cs);
  for (const auto& x : cs)
    if (alphaEqual(x, c)) return true;
  return alphaEqual(host, c);
}

// Conjoins only when not already (alpha-)present; keeps the fixpoint finite.
FormulaP addOnce(const FormulaP& host, const FormulaP& extra, bool& changed) {
  if (isTop(extra)) return host;
  std::vector<FormulaP> parts;
  FormulaP stripped = extra;
  topConjuncts(stripped, parts);
  FormulaP acc = host;
  for (const auto& p : parts) {
    if (containsConjunct(acc, p)) continue;
    acc = conjoinScoped(acc, p);
    changed = true;
  }
  return acc;
}

struct Propagator {
  const std::string& X;
  bool changed = false;

  LBody pass(const LBody& in) {
    LBody items;
    // Structural recursion first.
    for (const auto& it : in) {
      if (const auto* rp = it->as<LItem::Repeat>()) {
        items.push_back(mkLItem(LItem::Repeat{pass(rp->body), rp->invariant}));
      } else if (const auto* sel = it->as<LItem::Select>()) {
        LItem::Select s;
        for (const auto& br : sel->branches) s.branches.push_back(pass(br));
        items.push_back(mkLItem(std::move(s)));
      } else if (const auto* off = it->as<LItem::Offer>()) {
        LItem::Offer o;
        o.srcObject = off->srcObject;
        o.srcMethod = off->srcMethod;
        for (const auto& br : off->branches)
          o.branches.push_back(LItem::Offer::Branch{br.guard, pass(br.body)});
        items.push_back(mkLItem(std::move(o)));
      } else {
        items.push_back(it);
      }
    }
    // Rule 5: invariant enters the first receive and last put of a loop body.
    for (auto& it : items) {
      const auto* rp = it->as<LItem::Repeat>();
      if (!rp || rp->body.empty()) continue;
      const auto* rcv0 = rp->body.front()->as<LItem::Receive>();
      const auto* put0 = rp->body.back()->as<LItem::Put>();
      if (!rcv0 || !put0) continue;
      bool c1 = false, c2 = false;
      FormulaP pre = addOnce(rcv0->pre, rp->invariant, c1);
      FormulaP post = addOnce(put0->post, rp->invariant, c2);
      if (c1 || c2) {
        LBody nb = rp->body;
        nb.front() = mkLItem(LItem::Receive{rcv0->method, pre});
        nb.back() = mkLItem(LItem::Put{post});
        it = mkLItem(LItem::Repeat{nb, rp->invariant});
        changed = true;
      }
    }
    // Adjacency rules 1-4.
    for (size_t i = 0; i + 1 < items.size(); ++i) {
      const LItemP& a = items[i];
      const LItemP& b = items[i + 1];
      if (const auto* put = a->as<LItem::Put>()) {
        if (const auto* rcvB = b->as<LItem::Receive>()) {
          bool c = false;
          FormulaP pre = addOnce(rcvB->pre, statePart(put->post, X), c);
          if (c) {
            items[i + 1] = mkLItem(LItem::Receive{rcvB->method, pre});
            changed = true;
          }
        } else if (const auto* rep = b->as<LItem::Repeat>()) {
          bool c = false;
          FormulaP post = addOnce(put->post, rep->invariant, c);
          if (c) {
            items[i] = mkLItem(LItem::Put{post});
            changed = true;
          }
        }
      } else if (const auto* rep = a->as<LItem::Repeat>()) {
        if (const auto* rcvB = b->as<LItem::Receive>()) {
          bool c = false;
          FormulaP pre = addOnce(rcvB->pre, rep->invariant, c);
          if (c) {
            items[i + 1] = mkLItem(LItem::Receive{rcvB->method, pre});
            changed = true;
          }
        } else if (const auto* rep2 = b->as<LItem::Repeat>()) {
          if (lbodyEqual(rep->body, rep2->body)) {
            bool c = false;
            FormulaP inv = addOnce(rep->invariant, rep2->invariant, c);
            if (c) {
              items[i] = mkLItem(LItem::Repeat{rep->body, inv});
              changed = true;
            }
          }
        }
      }
    }
    return items;
  }
};

}  // namespace

LocalType propagate(const LocalType& t) {
  LocalType cur = normalizeLocal(t);
  for (int round = 0; round < 64; ++round) {
    Propagator p{cur.object};
    LBody next = p.pass(cur.items);
    cur.items = std::move(next);
    if (!p.changed) return cur;
  }
  throw InternalError("propagation did not reach a fixpoint");
}

// ---------------------------------------------------------------------------
// Projection on methods: segmentation with a current-method token.
// ---------------------------------------------------------------------------
namespace {

struct MWalk {
  const std::string& m;
  std::vector<LBody> results;

  // Walks items under `token`; returns the token after the walk and appends
  // in-process content for m to `buffer`. Inside a choice branch the
  // enclosing segment owns the buffer, so a closing Put stays in it instead
  // of emitting a separate method type.
  std::optional<std::string> walk(const LBody& items, std::optional<std::string> token,
                                  LBody& buffer, bool inBranch = false) {
    for (const auto& it : items) {
      if (const auto* r = it->as<LItem::Receive>()) {
        if (token)
          throw ProjectionUndefined("method projection",
                                    "receive for " + r->method + " while " + *token +
                                        " is still running");
        token = r->method;
        if (*token == m) {
          if (inBranch && !buffer.empty())
            throw ProjectionUndefined("method projection",
                                      "second process of " + m + " inside a choice branch");
          buffer.push_back(it);
        }
        continue;
      }
      if (it->as<LItem::Put>()) {
        if (!token)
          throw ProjectionUndefined("method projection", "termination outside a process");
        if (*token == m) {
          buffer.push_back(it);
          if (!inBranch) {
            results.push_back(buffer);
            buffer.clear();
          }
        }
        token.reset();
        continue;
      }
      if (it->as<LItem::Send>() || it->as<LItem::Read>()) {
        if (!token)
          throw ProjectionUndefined("method projection", "action outside a process");
        if (*token == m) buffer.push_back(it);
        continue;
      }
      if (const auto* rp = it->as<LItem::Repeat>()) {
        if (!token) {
          // Whole processes inside: the repetition is not visible to a
          // single process and is removed.
          LBody sub;
          auto after = walk(rp->body, std::nullopt, sub);
          if (after)
            throw ProjectionUndefined("method projection",
                                      "repetition body leaves process " + *after + " open");
          if (!sub.empty())
            throw ProjectionUndefined("method projection", "dangling items in repetition");
          continue;
        }
        // The process encloses the loop: keep the repetition, project inside.
        LBody sub;
        auto after = walk(rp->body, token, sub);
        if (after != token)
          throw ProjectionUndefined("method projection",
                                    "repetition body must not switch processes");
        if (*token == m && !sub.empty())
          buffer.push_back(mkLItem(LItem::Repeat{sub, rp->invariant}));
        continue;
      }
      if (const auto* sel = it->as<LItem::Select>()) {
        if (!token)
          throw ProjectionUndefined("method projection", "choice outside a process");
        std::vector<LBody> branches;
        bool mine = (*token == m);
        for (const auto& br : sel->branches) {
          LBody sub;
          auto after = walk(br, token, sub, /*inBranch=*/true);
          if (after)
            throw ProjectionUndefined("method projection",
                                      "choice branch leaves process " + *after + " open");
          branches.push_back(std::move(sub));
        }
        if (mine) {
          buffer.push_back(mkLItem(LItem::Select{branches}));
          results.push_back(buffer);
          buffer.clear();
        }
        token.reset();
        continue;
      }
      if (const auto* off = it->as<LItem::Offer>()) {
        if (!token)
          throw ProjectionUndefined("method projection", "choice outside a process");
        bool mine = (*token == m);
        LItem::Offer out;
        out.srcObject = off->srcObject;
        out.srcMethod = off->srcMethod;
        std::optional<TermP> commonRead;
        for (const auto& br : off->branches) {
          LBody sub;
          auto after = walk(br.body, token, sub, /*inBranch=*/true);
          if (after)
            throw ProjectionUndefined("method projection",
                                      "offer branch leaves process " + *after + " open");
          if (mine) {
            // Read-hoisting: every branch must start with the same read; it
            // moves in front of the passive choice (the get statement sits
            // before the if that branches on its value).
            if (sub.empty() || !sub.front()->as<LItem::Read>())
              throw ProjectionUndefined("method projection",
                                        "offer branch does not start with a read");
            TermP loc = sub.front()->as<LItem::Read>()->locExpr;
            if (!commonRead) commonRead = loc;
            else if (!termEqual(*commonRead, loc))
              throw ProjectionUndefined("method projection",
                                        "offer branches read different locations");
            sub.erase(sub.begin());
          }
          out.branches.push_back(LItem::Offer::Branch{br.guard, std::move(sub)});
        }
        if (mine) {
          buffer.push_back(mkLItem(LItem::Read{*commonRead}));
          buffer.push_back(mkLItem(std::move(out)));
          results.push_back(buffer);
          buffer.clear();
        }
        token.reset();
        continue;
      }
      if (it->as<LItem::End>() || it->as<LItem::SkipI>()) continue;
    }
    return token;
  }
};

void collectMethods(const LBody& items, std::set<std::string>& out) {
  for (const auto& it : items) {
    if (const auto* r = it->as<LItem::Receive>()) out.insert(r->method);
    else if (const auto* rp = it->as<LItem::Repeat>()) collectMethods(rp->body, out);
    else if (const auto* sel = it->as<LItem::Select>()) {
      for (const auto& br : sel->branches) collectMethods(br, out);
    } else if (const auto* off = it->as<LItem::Offer>()) {
      for (const auto& br : off->branches) collectMethods(br.body, out);
    }
  }
}

}  // namespace

std::vector<LocalType> projectOnMethod(const LocalType& objectType, const std::string& m) {
  LocalType n = normalizeLocal(objectType);
  MWalk w{m};
  LBody buffer;
  auto token = w.walk(n.items, std::nullopt, buffer);
  if (token)
    throw ProjectionUndefined("method projection",
                              "object type leaves process " + *token + " open");
  if (!buffer.empty())
    throw ProjectionUndefined("method projection", "dangling items after last process");
  std::vector<LocalType> out;
  for (auto& body : w.results) out.push_back(LocalType{objectType.object, std::move(body)});
  return out;
}

std::set<std::string> methodsOf(const LocalType& t) {
  std::set<std::string> out;
  collectMethods(t.items, out);
  return out;
}

bool csCheck(const FormulaP& phi) {
  std::vector<FormulaP> parts;
  for (const auto& obj : objectsOf(phi)) parts.push_back(weaken(phi, obj));
  FormulaP conj = conjoin(parts);
  ValidityResult r = checkValidity(mkOr(mkNeg(conj), phi));
  return r.valid();  // Unknown counts as failure
}

// ---------------------------------------------------------------------------
// Well-formedness.
// ---------------------------------------------------------------------------
WfReport wellFormed(const GlobalType& g) {
  WfReport rep;
  for (const auto& X : g.roles()) {
    try {
      LocalType obj = propagate(projectOnObject(g, X));
      std::set<std::string> methods = methodsOf(obj);
      for (const auto& m : methods) {
        std::vector<LocalType> types = projectOnMethod(obj, m);
        // Distinguishability: pairwise non-overlapping preconditions.
        for (size_t i = 0; i < types.size(); ++i) {
          for (size_t j = i + 1; j < types.size(); ++j) {
            const auto* ri = types[i].items.front()->as<LItem::Receive>();
            const auto* rj = types[j].items.front()->as<LItem::Receive>();
            if (!ri || !rj) continue;
            ValidityResult v = checkValidity(mkNeg(mkAnd(ri->pre, rj->pre)));
            if (!v.valid()) {
              rep.ok = false;
              rep.issues.push_back(Diagnostic{
                  "well-formedness",
                  "method types of " + X + "." + m + " have overlapping preconditions", {}});
            }
          }
        }
      }
    } catch (const ProjectionUndefined& e) {
      rep.ok = false;
      rep.issues.push_back(Diagnostic{e.rule(), e.message(), {}});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Postcondition databases.
// ---------------------------------------------------------------------------
namespace {

void collectPosts(const GBody& items, std::map<std::string, std::string>& activeMethod,
                  std::map<std::pair<std::string, std::string>, std::vector<FormulaP>>& db) {
  for (const auto& it : items) {
    if (const auto* c = it->as<GItem::Call>()) {
      db[{c->callee, c->method}].push_back(c->post);
      activeMethod[c->callee] = c->method;
    } else if (const auto* rp = it->as<GItem::Repeat>()) {
      collectPosts(rp->body, activeMethod, db);
    } else if (const auto* ch = it->as<GItem::Choice>()) {
      auto chooserMethod = activeMethod.find(ch->chooser);
      for (const auto& br : ch->branches) {
        if (chooserMethod != activeMethod.end())
          db[{ch->chooser, chooserMethod->second}].push_back(br.post);
        for (const auto& [obj, f] : br.reacts) {
          auto am = activeMethod.find(obj);
          if (am != activeMethod.end()) db[{obj, am->second}].push_back(f);
        }
        auto saved = activeMethod;
        collectPosts(br.body, activeMethod, db);
        activeMethod = saved;
      }
    }
  }
}

}  // namespace

std::map<std::pair<std::string, std::string>, FormulaP> postDatabase(const GlobalType& g) {
  std::map<std::pair<std::string, std::string>, std::vector<FormulaP>> raw;
  raw[{g.head.callee, g.head.method}].push_back(g.head.post);
  std::map<std::string, std::string> activeMethod;
  activeMethod[g.head.callee] = g.head.method;
  collectPosts(g.body, activeMethod, raw);
  std::map<std::pair<std::string, std::string>, FormulaP> db;
  for (const auto& [key, posts] : raw) {
    // A call's future satisfies the base post; with branching the chooser's
    // extra posts hold disjunctively. Multiple calls to one method also fold
    // disjunctively (sound for any resolving call).
    FormulaP base;
    std::vector<FormulaP> extras;
    for (const auto& p : posts) {
      if (!base) base = p;
      else extras.push_back(p);
    }
    FormulaP acc = base;
    for (const auto& e : extras) {
      if (isTop(e) || alphaEqual(e, acc)) continue;
      acc = mkOr(acc, e);
    }
    db[key] = simplify(acc);
  }
  return db;
}

FormulaP postConjunction(const GlobalType& g) {
  std::vector<FormulaP> parts;
  parts.push_back(statePart(g.head.post, g.head.callee));
  std::function<void(const GBody&, std::map<std::string, std::string>&)> walk =
      [&](const GBody& items, std::map<std::string, std::string>& activeMethod) {
        for (const auto& it : items) {
          if (const auto* c = it->as<GItem::Call>()) {
            parts.push_back(statePart(c->post, c->callee));
            activeMethod[c->callee] = c->method;
          } else if (const auto* rp = it->as<GItem::Repeat>()) {
            walk(rp->body, activeMethod);
          } else if (const auto* ch = it->as<GItem::Choice>()) {
            for (const auto& br : ch->branches) {
              auto saved = activeMethod;
              walk(br.body, activeMethod);
              activeMethod = saved;
            }
          }
        }
      };
  std::map<std::string, std::string> am;
  am[g.head.callee] = g.head.method;
  walk(g.body, am);
  std::vector<FormulaP> dedup;
  for (const auto& p : parts) {
    FormulaP sp = simplify(p);
    if (isTop(sp)) continue;
    bool dup = false;
    for (const auto& q : dedup) dup = dup || alphaEqual(q, sp);
    if (!dup) dedup.push_back(sp);
  }
  return conjoin(dedup);
}

}  // namespace asyncst
