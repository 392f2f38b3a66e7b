#include "asyncst/constraints.hpp"

#include <functional>

#include "asyncst/logic.hpp"
#include "asyncst/projection.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------
namespace {

bool activeAfter(const Trace& tr, int pos, const std::string& obj) {
  return tr[pos].after.activeAt(obj);
}

bool isResolving(const Trace& tr, int pos) {
  return tr[pos].ev.kind == Event::K::Resolving;
}

struct Ev {
  const Trace& tr;
  std::map<std::string, int> pos;
  std::map<std::string, Value> data;
  // Memo for env-independent subproblems.
  std::map<std::tuple<const TC*, int, int>, bool> memo;
  const TC* failedLabel = nullptr;

  bool envEmpty() const { return pos.empty() && data.empty(); }

  bool matchSlot(const Slot& s, const Value& v) {
    switch (s.kind) {
      case Slot::K::Any: return true;
      case Slot::K::Lit: return valueEq(s.lit, v);
      case Slot::K::Var: {
        auto it = data.find(s.var);
        if (it != data.end()) return valueEq(it->second, v);
        data[s.var] = v;
        return true;
      }
    }
    return false;
  }

  bool matchEvent(const EventPattern& p, const Event& ev) {
    if (ev.kind != p.kind) return false;
    if (p.caller && ev.caller != *p.caller) return false;
    if (p.object && ev.object != *p.object) return false;
    if (p.method && ev.method != *p.method) return false;
    if (!matchSlot(p.fut, ev.fut)) return false;
    if (p.value.kind != Slot::K::Any) {
      if (!ev.value) return false;
      if (!matchSlot(p.value, *ev.value)) return false;
    }
    for (const auto& [name, idx] : p.argBinds) {
      if (idx >= ev.args.size()) return false;
      if (!matchSlot(Slot::bind(name), ev.args[idx])) return false;
    }
    return true;
  }

  bool evalConfigSat(const TC::ConfigSat& n, int lo, int hi) {
    (void)lo;
    (void)hi;
    auto it = pos.find(n.posVar);
    if (it == pos.end()) throw InternalError("unbound position variable " + n.posVar);
    int p = it->second;
    const Configuration& cfg = n.afterFire ? tr[p].after : tr[p].config;
    EvalFrame frame;
    switch (n.frame.kind) {
      case FrameHint::K::None: break;
      case FrameHint::K::ProcOfFut: {
        auto dit = data.find(n.frame.futVar);
        if (dit == data.end()) return false;
        const FutId* f = std::get_if<FutId>(&dit->second);
        if (!f) return false;
        frame.proc = cfg.process(*f);
        if (frame.proc) frame.selfObject = frame.proc->object;
        break;
      }
      case FrameHint::K::ActiveProcOf: {
        const ObjectState* o = cfg.object(n.frame.object);
        if (!o || !o->active) return false;
        frame.proc = cfg.process(*o->active);
        frame.selfObject = n.frame.object;
        break;
      }
    }
    if (!n.frame.object.empty()) frame.selfObject = n.frame.object;
    if (n.frame.resultVar) {
      auto dit = data.find(*n.frame.resultVar);
      if (dit == data.end()) return false;
      frame.result = dit->second;
    }
    for (const auto& [sym, dvar] : n.frame.extraFromData) {
      auto dit = data.find(dvar);
      if (dit == data.end()) return false;
      frame.extra[sym] = dit->second;
    }
    try {
      return evalFormula(n.formula, cfg, frame);
    } catch (const EvalError&) {
      return false;  // unresolvable symbol: the trace does not satisfy it
    }
  }

  bool invariantAt(const FormulaP& inv, int boundary) {
    if (tr.empty()) return true;
    try {
      if (boundary < (int)tr.size())
        return evalFormula(inv, tr[boundary].config, EvalFrame{});
      return evalFormula(inv, tr.back().after, EvalFrame{});
    } catch (const EvalError&) {
      return false;
    }
  }

  bool evalSet(const TC::ExistsSet& n, const TC* node, int lo, int hi) {
    if (lo == hi) return true;  // zero iterations
    if (!invariantAt(n.invariant, lo)) return false;
    // seg(p): the window [p,hi) splits into nonempty segments, the invariant
    // holding at every boundary.
    std::function<bool(int)> seg = [&](int p) -> bool {
      if (p == hi) return true;
      auto key = std::make_tuple(node, p, hi);
      auto mit = memo.find(key);
      if (mit != memo.end()) return mit->second;
      bool ok = false;
      for (int q = p + 1; q <= hi && !ok; ++q) {
        if (!invariantAt(n.invariant, q)) continue;
        auto savedPos = pos;
        auto savedData = data;
        bool segOk = eval(n.segment, p, q);
        pos = savedPos;
        data = savedData;
        if (!segOk) continue;
        ok = seg(q);
      }
      memo[key] = ok;
      return ok;
    };
    return seg(lo);
  }

  bool eval(const TCP& c, int lo, int hi) {
    if (c->as<TC::True>()) return true;
    if (const auto* n = c->as<TC::And>()) {
      auto savedPos = pos;
      auto savedData = data;
      for (const auto& ch : n->cs) {
        if (!eval(ch, lo, hi)) {
          if (!ch->label.empty() && !failedLabel) failedLabel = ch.get();
          pos = savedPos;
          data = savedData;
          return false;
        }
      }
      return true;
    }
    if (const auto* n = c->as<TC::Or>()) {
      for (const auto& ch : n->cs) {
        auto savedPos = pos;
        auto savedData = data;
        if (eval(ch, lo, hi)) return true;
        pos = savedPos;
        data = savedData;
      }
      return false;
    }
    if (const auto* n = c->as<TC::Not>()) {
      auto savedPos = pos;
      auto savedData = data;
      bool r = eval(n->c, lo, hi);
      pos = savedPos;
      data = savedData;
      return !r;
    }
    if (const auto* n = c->as<TC::ExistsPos>()) {
      int from = n->windowed ? lo : 0;
      int to = n->windowed ? hi : (int)tr.size();
      for (int p = from; p < to; ++p) {
        auto savedPos = pos;
        auto savedData = data;
        pos[n->var] = p;
        if (eval(n->body, lo, hi)) return true;
        pos = savedPos;
        data = savedData;
      }
      return false;
    }
    if (const auto* n = c->as<TC::ForallPos>()) {
      int from = n->windowed ? lo : 0;
      int to = n->windowed ? hi : (int)tr.size();
      for (int p = from; p < to; ++p) {
        auto savedPos = pos;
        auto savedData = data;
        pos[n->var] = p;
        bool ok = eval(n->body, lo, hi);
        pos = savedPos;
        data = savedData;
        if (!ok) return false;
      }
      return true;
    }
    if (const auto* n = c->as<TC::EventMatch>()) {
      auto it = pos.find(n->posVar);
      if (it == pos.end()) throw InternalError("unbound position variable " + n->posVar);
      return matchEvent(n->pattern, tr[it->second].ev);
    }
    if (const auto* n = c->as<TC::ConfigSat>()) return evalConfigSat(*n, lo, hi);
    if (const auto* n = c->as<TC::PosCompare>()) {
      int a = pos.at(n->a);
      int b = pos.at(n->b);
      switch (n->op) {
        case TC::PosCompare::Op::Lt: return a < b;
        case TC::PosCompare::Op::Le: return a <= b;
        case TC::PosCompare::Op::Eq: return a == b;
        case TC::PosCompare::Op::Ne: return a != b;
      }
      return false;
    }
    if (const auto* n = c->as<TC::ResPred>()) return isResolving(tr, pos.at(n->posVar));
    if (const auto* n = c->as<TC::ActivePred>())
      return activeAfter(tr, pos.at(n->posVar), n->object);
    if (const auto* n = c->as<TC::ResElsewhere>()) {
      for (int l = lo; l < hi; ++l) {
        if (actorOf(tr[l].ev) != n->object) continue;
        bool excepted = false;
        for (const auto& v : n->exceptVars) {
          auto it = pos.find(v);
          if (it != pos.end() && it->second == l) excepted = true;
        }
        if (!excepted && !isResolving(tr, l)) return false;
      }
      return true;
    }
    if (const auto* n = c->as<TC::FirstTerm>()) {
      int p = pos.at(n->posVar);
      const Event& ev = tr[p].ev;
      if (ev.kind != Event::K::Resolving || ev.object != n->object) return false;
      for (int q = lo; q < p; ++q) {
        if (tr[q].ev.kind == Event::K::Resolving && tr[q].ev.object == n->object) return false;
      }
      return true;
    }
    if (const auto* n = c->as<TC::LastTerm>()) {
      int p = pos.at(n->posVar);
      const Event& ev = tr[p].ev;
      if (ev.kind != Event::K::Resolving || ev.object != n->object ||
          ev.method != n->method)
        return false;
      for (int q = p + 1; q < hi; ++q) {
        if (tr[q].ev.kind == Event::K::Resolving && tr[q].ev.object == n->object &&
            tr[q].ev.method == n->method)
          return false;
      }
      return true;
    }
    if (const auto* n = c->as<TC::SeqSplit>()) {
      bool useMemo = envEmpty();
      auto key = std::make_tuple(c.get(), lo, hi);
      if (useMemo) {
        auto mit = memo.find(key);
        if (mit != memo.end()) return mit->second;
      }
      bool ok = false;
      for (int s = lo; s <= hi && !ok; ++s) {
        auto savedPos = pos;
        auto savedData = data;
        ok = eval(n->head, lo, s) && eval(n->tail, s, hi);
        pos = savedPos;
        data = savedData;
      }
      if (useMemo) memo[key] = ok;
      return ok;
    }
    if (const auto* n = c->as<TC::ExistsSet>()) return evalSet(*n, c.get(), lo, hi);
    if (const auto* n = c->as<TC::OfferGuard>()) {
      int last = -1;
      for (int q = lo; q < hi; ++q) {
        const Event& ev = tr[q].ev;
        if (ev.kind == Event::K::Resolving && ev.object == n->srcObject &&
            ev.method == n->srcMethod)
          last = q;
      }
      if (last >= 0) {
        EvalFrame frame;
        frame.result = tr[last].ev.value;
        frame.selfObject = n->srcObject;
        const Configuration& cfg = tr[last].config;
        frame.proc = cfg.process(tr[last].ev.fut);
        bool g;
        try {
          g = evalFormula(n->guard, cfg, frame);
        } catch (const EvalError&) {
          g = false;
        }
        if (!g) return false;
      }
      return eval(n->body, lo, hi);
    }
    if (c->as<TC::WindowEmpty>()) return lo == hi;
    if (const auto* n = c->as<TC::Window>()) {
      int l = std::max(lo, n->lo);
      int h = std::min(hi, n->hi);
      if (l > h) l = h;
      return eval(n->body, l, h);
    }
    throw InternalError("unhandled constraint node");
  }
};

}  // namespace

CheckResult checkTrace(const Trace& tr, const TCP& c) {
  Ev ev{tr};
  CheckResult res;
  res.ok = ev.eval(c, 0, (int)tr.size());
  if (!res.ok && ev.failedLabel) res.refutedLabel = ev.failedLabel->label;
  return res;
}

bool evalConstraintWindow(const Trace& tr, const TCP& c, int lo, int hi) {
  Ev ev{tr};
  return ev.eval(c, lo, hi);
}

TCP relativize(const TCP& c, int lo, int hi) {
  return mkTC(TC::Window{lo, hi, c}, c->label);
}

bool bruteForceExistsSet(const Trace& tr, const TC::ExistsSet& node, int lo, int hi) {
  if (lo == hi) return true;
  // Enumerate internal boundary subsets of (lo, hi); endpoints are forced.
  std::vector<int> inner;
  for (int p = lo + 1; p < hi; ++p) inner.push_back(p);
  size_t count = (size_t)1 << inner.size();
  for (size_t mask = 0; mask < count; ++mask) {
    std::vector<int> bounds{lo};
    for (size_t i = 0; i < inner.size(); ++i)
      if (mask & ((size_t)1 << i)) bounds.push_back(inner[i]);
    bounds.push_back(hi);
    bool ok = true;
    Ev ev{tr};
    for (int b : bounds) {
      if (!ev.invariantAt(node.invariant, b)) ok = false;
    }
    for (size_t t = 0; ok && t + 1 < bounds.size(); ++t) {
      Ev seg{tr};
      if (!seg.eval(node.segment, bounds[t], bounds[t + 1])) ok = false;
    }
    if (ok) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Translation helpers.
// ---------------------------------------------------------------------------
namespace {

TCP tcAnd(std::vector<TCP> cs, std::string label = "") {
  if (cs.empty()) return mkTC(TC::True{}, std::move(label));
  if (cs.size() == 1 && label.empty()) return cs[0];
  return mkTC(TC::And{std::move(cs)}, std::move(label));
}
TCP tcOr(std::vector<TCP> cs, std::string label = "") {
  if (cs.size() == 1 && label.empty()) return cs[0];
  return mkTC(TC::Or{std::move(cs)}, std::move(label));
}

TermP dataRef(const std::string& dvar, Sort sort) {
  return mkVar("#" + dvar, sort, VarRole::Unresolved, "");
}

// Counter for unique position/data variable names per translation.
struct NameGen {
  int n = 0;
  std::string fresh(const std::string& base) { return base + std::to_string(n++); }
};

// ---------------------------------------------------------------------------
// Global translation: big conjunction over roles; each role's conjunct is a
// SeqSplit chain over items with the per-object anchor/res discipline.
// ---------------------------------------------------------------------------
struct GlobalTr {
  const GlobalType& g;
  NameGen names;

  FrameHint procFrame(const std::string& futVar, const std::string& obj,
                      std::optional<std::string> resultVar = std::nullopt) {
    FrameHint fh;
    fh.kind = FrameHint::K::ProcOfFut;
    fh.futVar = futVar;
    fh.object = obj;
    fh.resultVar = std::move(resultVar);
    return fh;
  }

  TCP mainItemFor(const std::string& X) {
    std::vector<TCP> parts;
    if (g.head.callee == X) {
      std::string j = names.fresh("j");
      std::string k = names.fresh("k");
      std::string f = names.fresh("f");
      std::string v = names.fresh("v");
      EventPattern pj;
      pj.kind = Event::K::InvocationReaction;
      pj.object = X;
      pj.method = g.head.method;
      pj.fut = Slot::bind(f);
      EventPattern pk;
      pk.kind = Event::K::Resolving;
      pk.object = X;
      pk.method = g.head.method;
      pk.fut = Slot::bind(f);
      pk.value = Slot::bind(v);
      TCP inner = tcAnd(
          {mkTC(TC::EventMatch{k, pk}),
           mkTC(TC::ConfigSat{k, g.head.post, procFrame(f, X, v), false})});
      TCP body = tcAnd({mkTC(TC::EventMatch{j, pj}),
                        mkTC(TC::ExistsPos{k, false, inner}),
                        mkTC(TC::ResElsewhere{X, {j, k}})});
      parts.push_back(mkTC(TC::ExistsPos{j, true, body},
                           X + ": main call " + g.head.callee + "." + g.head.method));
    } else {
      parts.push_back(mkTC(TC::ResElsewhere{X, {}}));
    }
    return tcAnd(std::move(parts));
  }

  TCP callItemFor(const GItem::Call& c, const std::string& X) {
    if (c.caller == X) {
      std::string i = names.fresh("i");
      std::string f = names.fresh("f");
      EventPattern pi;
      pi.kind = Event::K::Invocation;
      pi.caller = c.caller;
      pi.object = c.callee;
      pi.method = c.method;
      pi.fut = Slot::bind(f);
      std::vector<TCP> parts{mkTC(TC::EventMatch{i, pi})};
      if (!isTop(c.pre)) {
        FrameHint fh;
        fh.kind = FrameHint::K::ActiveProcOf;
        fh.object = c.caller;
        for (size_t a = 0; a < c.params.size(); ++a) {
          std::string av = names.fresh("a");
          pi.argBinds.emplace_back(av, a);
          fh.extraFromData.emplace_back(c.params[a], av);
        }
        parts[0] = mkTC(TC::EventMatch{i, pi});
        parts.push_back(mkTC(TC::ConfigSat{i, c.pre, fh, false}));
      }
      if (c.loc) {
        // The future must land in the annotated location right after the call.
        FrameHint fh;
        fh.kind = FrameHint::K::ActiveProcOf;
        fh.object = c.caller;
        fh.extraFromData.emplace_back("#" + f, f);
        FormulaP locEq = mkEq(mkVar(*c.loc, Sort::Fut, VarRole::CallerSide, c.caller),
                              dataRef(f, Sort::Fut));
        parts.push_back(mkTC(TC::ConfigSat{i, locEq, fh, true}));
      }
      parts.push_back(mkTC(TC::ResElsewhere{X, {i}}));
      return mkTC(TC::ExistsPos{i, true, tcAnd(std::move(parts))},
                  X + ": call " + c.callee + "." + c.method);
    }
    if (c.callee == X) {
      std::string j = names.fresh("j");
      std::string k = names.fresh("k");
      std::string f = names.fresh("f");
      std::string v = names.fresh("v");
      EventPattern pj;
      pj.kind = Event::K::InvocationReaction;
      pj.object = X;
      pj.method = c.method;
      pj.fut = Slot::bind(f);
      EventPattern pk;
      pk.kind = Event::K::Resolving;
      pk.object = X;
      pk.method = c.method;
      pk.fut = Slot::bind(f);
      pk.value = Slot::bind(v);
      std::vector<TCP> inner{mkTC(TC::EventMatch{k, pk})};
      if (!isTop(c.post))
        inner.push_back(mkTC(TC::ConfigSat{k, c.post, procFrame(f, X, v), false}));
      std::vector<TCP> parts{mkTC(TC::EventMatch{j, pj})};
      FormulaP weakPre = simplify(weaken(c.pre, X));
      if (!isTop(weakPre))
        parts.push_back(mkTC(TC::ConfigSat{j, weakPre, procFrame(f, X), false}));
      parts.push_back(mkTC(TC::ExistsPos{k, false, tcAnd(std::move(inner))}));
      parts.push_back(mkTC(TC::ResElsewhere{X, {j, k}}));
      return mkTC(TC::ExistsPos{j, true, tcAnd(std::move(parts))},
                  X + ": serve " + c.callee + "." + c.method);
    }
    return mkTC(TC::ResElsewhere{X, {}});
  }

  TCP readItemFor(const GItem::Read& r, const std::string& X) {
    if (r.object != X) return mkTC(TC::ResElsewhere{X, {}});
    std::string i = names.fresh("i");
    std::string f = names.fresh("f");
    std::string v = names.fresh("v");
    EventPattern pi;
    pi.kind = Event::K::Fetch;
    pi.object = X;
    pi.fut = Slot::bind(f);
    pi.value = Slot::bind(v);
    FrameHint fh;
    fh.kind = FrameHint::K::ActiveProcOf;
    fh.object = X;
    fh.extraFromData.emplace_back("#" + f, f);
    FormulaP locEq = mkEq(r.locExpr, dataRef(f, Sort::Fut));
    TCP body = tcAnd({mkTC(TC::EventMatch{i, pi}), mkTC(TC::ConfigSat{i, locEq, fh, false}),
                      mkTC(TC::ResElsewhere{X, {i}})});
    return mkTC(TC::ExistsPos{i, true, body}, X + ": read " + prettyTermLabel(r.locExpr));
  }

  static std::string prettyTermLabel(const TermP& t) {
    if (const auto* v = t->as<Term::Var>()) return v->name;
    if (const auto* s = t->as<Term::Select>()) return s->object + "." + s->field;
    return "loc";
  }

  TCP chainFor(const GBody& items, size_t idx, const std::string& X) {
    if (idx >= items.size()) return mkTC(TC::True{});
    TCP head = itemFor(items[idx], X);
    if (idx + 1 == items.size()) return head;
    TCP tail = chainFor(items, idx + 1, X);
    return mkTC(TC::SeqSplit{head, tail});
  }

  TCP itemFor(const GItemP& it, const std::string& X) {
    if (const auto* c = it->as<GItem::Call>()) return callItemFor(*c, X);
    if (const auto* r = it->as<GItem::Read>()) return readItemFor(*r, X);
    if (const auto* rp = it->as<GItem::Repeat>()) {
      TCP seg = chainFor(rp->body, 0, X);
      return mkTC(TC::ExistsSet{names.fresh("B"), rp->invariant, seg}, X + ": repetition");
    }
    if (const auto* ch = it->as<GItem::Choice>()) return choiceFor(*ch, X);
    if (it->as<GItem::End>()) return mkTC(TC::ResElsewhere{X, {}});
    throw InternalError("unknown global item");
  }

  TCP choiceFor(const GItem::Choice& ch, const std::string& X) {
    std::vector<TCP> branches;
    for (const auto& br : ch.branches) {
      std::vector<TCP> parts;
      // The choosing process terminates before every reacting process, and
      // each reactor's first termination satisfies its reaction post.
      std::string k = names.fresh("k");
      EventPattern pk;
      pk.kind = Event::K::Resolving;
      pk.object = ch.chooser;
      std::vector<TCP> ord{mkTC(TC::EventMatch{k, pk}), mkTC(TC::FirstTerm{k, ch.chooser})};
      for (const auto& [obj, react] : br.reacts) {
        std::string kj = names.fresh("k");
        std::string fj = names.fresh("f");
        std::string vj = names.fresh("v");
        EventPattern pj;
        pj.kind = Event::K::Resolving;
        pj.object = obj;
        pj.fut = Slot::bind(fj);
        pj.value = Slot::bind(vj);
        TCP body = tcAnd({mkTC(TC::EventMatch{kj, pj}), mkTC(TC::FirstTerm{kj, obj}),
                          mkTC(TC::PosCompare{TC::PosCompare::Op::Le, k, kj}),
                          mkTC(TC::ConfigSat{kj, react, procFrame(fj, obj, vj), false})});
        ord.push_back(mkTC(TC::ExistsPos{kj, true, body}));
      }
      parts.push_back(mkTC(TC::ExistsPos{k, true, tcAnd(std::move(ord))},
                           X + ": choice ordering"));
      parts.push_back(chainFor(br.body, 0, X));
      branches.push_back(tcAnd(std::move(parts)));
    }
    return tcOr(std::move(branches), X + ": choice at " + ch.chooser);
  }

  TCP translate() {
    std::vector<TCP> conj;
    for (const auto& X : g.roles()) {
      TCP tail = chainFor(g.body, 0, X);
      TCP head = mainItemFor(X);
      TCP chain = mkTC(TC::SeqSplit{head, tail});
      chain = mkTC(TC::And{{chain}}, "object " + X);
      conj.push_back(chain);
    }
    return tcAnd(std::move(conj));
  }
};

// ---------------------------------------------------------------------------
// Local translation.
// ---------------------------------------------------------------------------
struct LocalTr {
  const LocalType& L;
  NameGen names;

  // exactly-one-position wrapper: the window is a single position matching
  // the body (the appendix's "exists i. forall j. i = j /\ ..." form).
  TCP exactlyOne(const std::string& i, std::vector<TCP> body, std::string label) {
    std::string j = names.fresh("q");
    body.push_back(mkTC(TC::ForallPos{j, true,
                                      mkTC(TC::PosCompare{TC::PosCompare::Op::Eq, j, i})}));
    return mkTC(TC::ExistsPos{i, true, tcAnd(std::move(body))}, std::move(label));
  }

  FrameHint procFrame(const std::string& futVar, std::optional<std::string> resultVar = {}) {
    FrameHint fh;
    fh.kind = FrameHint::K::ProcOfFut;
    fh.futVar = futVar;
    fh.object = L.object;
    fh.resultVar = std::move(resultVar);
    return fh;
  }

  TCP itemFor(const LItemP& it) {
    const std::string& X = L.object;
    if (const auto* r = it->as<LItem::Receive>()) {
      std::string i = names.fresh("i");
      std::string f = names.fresh("f");
      EventPattern p;
      p.kind = Event::K::InvocationReaction;
      p.object = X;
      p.method = r->method;
      p.fut = Slot::bind(f);
      std::vector<TCP> body{mkTC(TC::EventMatch{i, p})};
      if (!isTop(r->pre)) body.push_back(mkTC(TC::ConfigSat{i, r->pre, procFrame(f), false}));
      return exactlyOne(i, std::move(body), X + ": ?" + r->method);
    }
    if (const auto* s = it->as<LItem::Send>()) {
      std::string i = names.fresh("i");
      std::string f = names.fresh("f");
      EventPattern p;
      p.kind = Event::K::Invocation;
      p.caller = X;
      p.object = s->callee;
      p.method = s->method;
      p.fut = Slot::bind(f);
      FrameHint fh;
      fh.kind = FrameHint::K::ActiveProcOf;
      fh.object = X;
      if (!isTop(s->pre)) {
        for (size_t a = 0; a < s->params.size(); ++a) {
          std::string av = names.fresh("a");
          p.argBinds.emplace_back(av, a);
          fh.extraFromData.emplace_back(s->params[a], av);
        }
      }
      std::vector<TCP> body{mkTC(TC::EventMatch{i, p})};
      if (!isTop(s->pre)) body.push_back(mkTC(TC::ConfigSat{i, s->pre, fh, false}));
      if (s->loc) {
        FrameHint fh2 = fh;
        fh2.extraFromData.emplace_back("#" + f, f);
        FormulaP locEq =
            mkEq(mkVar(*s->loc, Sort::Fut, VarRole::CallerSide, X), dataRef(f, Sort::Fut));
        body.push_back(mkTC(TC::ConfigSat{i, locEq, fh2, true}));
      }
      return exactlyOne(i, std::move(body), X + ": !" + s->method);
    }
    if (const auto* p = it->as<LItem::Put>()) {
      std::string i = names.fresh("i");
      std::string f = names.fresh("f");
      std::string v = names.fresh("v");
      EventPattern ep;
      ep.kind = Event::K::Resolving;
      ep.object = X;
      ep.fut = Slot::bind(f);
      ep.value = Slot::bind(v);
      std::vector<TCP> body{mkTC(TC::EventMatch{i, ep})};
      if (!isTop(p->post))
        body.push_back(mkTC(TC::ConfigSat{i, p->post, procFrame(f, v), false}));
      return exactlyOne(i, std::move(body), X + ": Put");
    }
    if (const auto* r = it->as<LItem::Read>()) {
      std::string i = names.fresh("i");
      std::string f = names.fresh("f");
      std::string v = names.fresh("v");
      EventPattern ep;
      ep.kind = Event::K::Fetch;
      ep.object = X;
      ep.fut = Slot::bind(f);
      ep.value = Slot::bind(v);
      FrameHint fh;
      fh.kind = FrameHint::K::ActiveProcOf;
      fh.object = X;
      fh.extraFromData.emplace_back("#" + f, f);
      FormulaP locEq = mkEq(r->locExpr, dataRef(f, Sort::Fut));
      return exactlyOne(i,
                        {mkTC(TC::EventMatch{i, ep}), mkTC(TC::ConfigSat{i, locEq, fh, false})},
                        X + ": Read");
    }
    if (const auto* rp = it->as<LItem::Repeat>()) {
      return mkTC(TC::ExistsSet{names.fresh("B"), rp->invariant, chain(rp->body, 0)},
                  X + ": repetition");
    }
    if (const auto* sel = it->as<LItem::Select>()) {
      std::vector<TCP> branches;
      for (const auto& br : sel->branches) branches.push_back(chain(br, 0));
      return tcOr(std::move(branches), X + ": select");
    }
    if (const auto* off = it->as<LItem::Offer>()) {
      std::vector<TCP> branches;
      for (const auto& br : off->branches) {
        branches.push_back(mkTC(
            TC::OfferGuard{off->srcObject, off->srcMethod, br.guard, chain(br.body, 0)}));
      }
      return tcOr(std::move(branches), X + ": offer");
    }
    if (it->as<LItem::End>()) return mkTC(TC::WindowEmpty{});
    if (it->as<LItem::SkipI>()) return mkTC(TC::True{});
    throw InternalError("unknown local item");
  }

  TCP chain(const LBody& items, size_t idx) {
    if (idx >= items.size()) return mkTC(TC::WindowEmpty{});
    TCP head = itemFor(items[idx]);
    if (idx + 1 == items.size()) return head;
    return mkTC(TC::SeqSplit{head, chain(items, idx + 1)});
  }
};

}  // namespace

TCP translateGlobal(const GlobalType& g) {
  GlobalTr tr{g};
  return tr.translate();
}

TCP translateLocal(const LocalType& l) {
  LocalType n = normalizeLocal(l);
  LocalTr tr{n};
  return tr.chain(n.items, 0);
}

}  // namespace asyncst
