#include "asyncst/formula.hpp"

#include <algorithm>
#include <functional>

namespace asyncst {

namespace {
template <class N>
TermP makeTerm(N n) {
  return std::make_shared<Term>(Term{std::move(n)});
}
template <class N>
FormulaP makeFormula(N n) {
  return std::make_shared<Formula>(Formula{std::move(n)});
}
}  // namespace

TermP mkVar(std::string name, Sort sort, VarRole role, std::string owner) {
  return makeTerm(Term::Var{std::move(name), sort, role, std::move(owner)});
}
TermP mkLit(Value v) { return makeTerm(Term::Lit{std::move(v)}); }
TermP mkHeap() { return makeTerm(Term::HeapSym{}); }
TermP mkSelect(TermP heap, std::string object, std::string field) {
  return makeTerm(Term::Select{std::move(heap), std::move(object), std::move(field)});
}
TermP mkStore(TermP heap, std::string object, std::string field, TermP value) {
  return makeTerm(Term::Store{std::move(heap), std::move(object), std::move(field), std::move(value)});
}
TermP mkResult() { return makeTerm(Term::Result{}); }
TermP mkSelf() { return makeTerm(Term::SelfRef{}); }
TermP mkFn(std::string op, std::vector<TermP> args) {
  return makeTerm(Term::Fn{std::move(op), std::move(args)});
}
TermP mkField(std::string object, std::string field) {
  return mkSelect(mkHeap(), std::move(object), std::move(field));
}

FormulaP mkTop() { return makeFormula(Formula::Top{}); }
FormulaP mkNeg(FormulaP f) { return makeFormula(Formula::Neg{std::move(f)}); }
FormulaP mkOr(FormulaP l, FormulaP r) { return makeFormula(Formula::Or{std::move(l), std::move(r)}); }
FormulaP mkAnd(FormulaP l, FormulaP r) { return makeFormula(Formula::And{std::move(l), std::move(r)}); }
FormulaP mkCmp(Formula::Cmp::Op op, TermP l, TermP r) {
  return makeFormula(Formula::Cmp{op, std::move(l), std::move(r)});
}
FormulaP mkBoolAtom(TermP t) { return makeFormula(Formula::BoolAtom{std::move(t)}); }
FormulaP mkPred(std::string name, std::vector<TermP> args) {
  return makeFormula(Formula::Pred{std::move(name), std::move(args)});
}
FormulaP mkExists(Sort sort, std::string var, FormulaP body) {
  return makeFormula(Formula::Exists{sort, std::move(var), std::move(body)});
}
FormulaP mkForall(Sort sort, std::string var, FormulaP body) {
  return makeFormula(Formula::Forall{sort, std::move(var), std::move(body)});
}
FormulaP mkModal(StmtP stmt, FormulaP body) {
  return makeFormula(Formula::Modal{std::move(stmt), std::move(body)});
}

FormulaP mkEq(TermP l, TermP r) { return mkCmp(Formula::Cmp::Op::Eq, std::move(l), std::move(r)); }
FormulaP mkNeq(TermP l, TermP r) { return mkNeg(mkEq(std::move(l), std::move(r))); }
FormulaP mkBot() { return mkNeg(mkTop()); }

bool isTop(const FormulaP& f) { return f && f->as<Formula::Top>() != nullptr; }

FormulaP conjoin(const std::vector<FormulaP>& fs) {
  FormulaP acc;
  for (const auto& f : fs) {
    if (!f || isTop(f)) continue;
    acc = acc ? mkAnd(acc, f) : f;
  }
  return acc ? acc : mkTop();
}

FormulaP conjoinScoped(FormulaP base, FormulaP extra) {
  if (!extra || isTop(extra)) return base;
  if (!base || isTop(base)) return extra;
  // Float base's leading existential prefix over the conjunction; rename the
  // bound variable when it would capture a symbol of extra.
  if (const auto* ex = base->as<Formula::Exists>()) {
    std::set<std::string> avoid = freeLogicalVars(extra);
    for (const auto& s : freeSymbols(extra))
      if (s.kind == SymbolInfo::K::Var) avoid.insert(s.name);
    std::string v = ex->var;
    FormulaP body = ex->body;
    if (avoid.count(v)) {
      std::string nv = freshName(v, avoid);
      body = substVar(body, v, mkVar(nv, ex->sort, VarRole::Logical));
      v = nv;
    }
    return mkExists(ex->sort, v, conjoinScoped(body, extra));
  }
  return mkAnd(base, extra);
}

// ---------------------------------------------------------------------------
// Traversal helpers.
// ---------------------------------------------------------------------------
namespace {

void walkTerm(const TermP& t, const std::function<void(const Term&)>& fn) {
  if (!t) return;
  fn(*t);
  if (const auto* s = t->as<Term::Select>()) {
    walkTerm(s->heap, fn);
  } else if (const auto* s = t->as<Term::Store>()) {
    walkTerm(s->heap, fn);
    walkTerm(s->value, fn);
  } else if (const auto* s = t->as<Term::Fn>()) {
    for (const auto& a : s->args) walkTerm(a, fn);
  }
}

void collectSyms(const FormulaP& f, std::set<std::string>& bound,
                 std::set<SymbolInfo>& out, std::set<std::string>& freeLogical) {
  if (!f) return;
  auto handleTerm = [&](const TermP& t) {
    walkTerm(t, [&](const Term& node) {
      if (const auto* v = std::get_if<Term::Var>(&node.node)) {
        if (v->role == VarRole::Logical) {
          if (!bound.count(v->name)) freeLogical.insert(v->name);
          return;
        }
        if (bound.count(v->name)) return;
        out.insert(SymbolInfo{SymbolInfo::K::Var, v->name, v->owner, v->role, v->sort});
      } else if (const auto* s = std::get_if<Term::Select>(&node.node)) {
        out.insert(SymbolInfo{SymbolInfo::K::Field, s->field, s->object,
                              VarRole::Unresolved, Sort::Unknown});
      } else if (const auto* s = std::get_if<Term::Store>(&node.node)) {
        out.insert(SymbolInfo{SymbolInfo::K::Field, s->field, s->object,
                              VarRole::Unresolved, Sort::Unknown});
      } else if (std::get_if<Term::Result>(&node.node)) {
        out.insert(SymbolInfo{SymbolInfo::K::Result, "result", "", VarRole::Unresolved,
                              Sort::Unknown});
      } else if (std::get_if<Term::SelfRef>(&node.node)) {
        out.insert(SymbolInfo{SymbolInfo::K::Self, "self", "", VarRole::Unresolved,
                              Sort::Obj});
      }
    });
  };
  struct V {
    std::set<std::string>& bound;
    std::set<SymbolInfo>& out;
    std::set<std::string>& freeLogical;
    const std::function<void(const TermP&)>& handleTerm;
    void operator()(const Formula::Top&) const {}
    void operator()(const Formula::Neg& n) const { collectSyms(n.f, bound, out, freeLogical); }
    void operator()(const Formula::Or& n) const {
      collectSyms(n.l, bound, out, freeLogical);
      collectSyms(n.r, bound, out, freeLogical);
    }
    void operator()(const Formula::And& n) const {
      collectSyms(n.l, bound, out, freeLogical);
      collectSyms(n.r, bound, out, freeLogical);
    }
    void operator()(const Formula::Cmp& n) const { handleTerm(n.l); handleTerm(n.r); }
    void operator()(const Formula::BoolAtom& n) const { handleTerm(n.t); }
    void operator()(const Formula::Pred& n) const {
      for (const auto& a : n.args) handleTerm(a);
    }
    void operator()(const Formula::Exists& n) const {
      bool fresh = bound.insert(n.var).second;
      collectSyms(n.body, bound, out, freeLogical);
      if (fresh) bound.erase(n.var);
    }
    void operator()(const Formula::Forall& n) const {
      bool fresh = bound.insert(n.var).second;
      collectSyms(n.body, bound, out, freeLogical);
      if (fresh) bound.erase(n.var);
    }
    void operator()(const Formula::Modal& n) const { collectSyms(n.body, bound, out, freeLogical); }
  };
  std::function<void(const TermP&)> ht = handleTerm;
  std::visit(V{bound, out, freeLogical, ht}, f->node);
}

}  // namespace

std::set<SymbolInfo> freeSymbols(const FormulaP& f) {
  std::set<std::string> bound;
  std::set<SymbolInfo> out;
  std::set<std::string> freeLog;
  collectSyms(f, bound, out, freeLog);
  return out;
}

std::set<std::string> freeLogicalVars(const FormulaP& f) {
  std::set<std::string> bound;
  std::set<SymbolInfo> out;
  std::set<std::string> freeLog;
  collectSyms(f, bound, out, freeLog);
  return freeLog;
}

std::set<std::string> objectsOf(const FormulaP& f) {
  std::set<std::string> objs;
  for (const auto& s : freeSymbols(f)) {
    if (s.kind == SymbolInfo::K::Field && !s.owner.empty() && s.owner != "self")
      objs.insert(s.owner);
  }
  return objs;
}

std::string freshName(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 0;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!taken.count(cand)) return cand;
  }
}

bool containsModal(const FormulaP& f) {
  if (!f) return false;
  if (f->as<Formula::Modal>()) return true;
  if (const auto* n = f->as<Formula::Neg>()) return containsModal(n->f);
  if (const auto* n = f->as<Formula::Or>()) return containsModal(n->l) || containsModal(n->r);
  if (const auto* n = f->as<Formula::And>()) return containsModal(n->l) || containsModal(n->r);
  if (const auto* n = f->as<Formula::Exists>()) return containsModal(n->body);
  if (const auto* n = f->as<Formula::Forall>()) return containsModal(n->body);
  return false;
}

bool mentionsResult(const FormulaP& f) {
  for (const auto& s : freeSymbols(f))
    if (s.kind == SymbolInfo::K::Result) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Alpha equality.
// ---------------------------------------------------------------------------
namespace {

bool termEqualRec(const TermP& a, const TermP& b,
                  const std::map<std::string, std::string>& ren) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  if (const auto* va = a->as<Term::Var>()) {
    const auto* vb = b->as<Term::Var>();
    bool la = va->role == VarRole::Logical;
    bool lb = vb->role == VarRole::Logical;
    if (la || lb) {
      if (la != lb) return false;
      auto it = ren.find(va->name);
      if (it != ren.end()) return it->second == vb->name;
      return va->name == vb->name;
    }
    // Ownership is resolution metadata, not printable surface; equality is
    // by name so printed types round-trip.
    return va->name == vb->name;
  }
  if (const auto* la = a->as<Term::Lit>()) return la->v == b->as<Term::Lit>()->v;
  if (a->as<Term::HeapSym>()) return true;
  if (const auto* sa = a->as<Term::Select>()) {
    const auto* sb = b->as<Term::Select>();
    return sa->object == sb->object && sa->field == sb->field &&
           termEqualRec(sa->heap, sb->heap, ren);
  }
  if (const auto* sa = a->as<Term::Store>()) {
    const auto* sb = b->as<Term::Store>();
    return sa->object == sb->object && sa->field == sb->field &&
           termEqualRec(sa->heap, sb->heap, ren) && termEqualRec(sa->value, sb->value, ren);
  }
  if (a->as<Term::Result>() || a->as<Term::SelfRef>()) return true;
  if (const auto* fa = a->as<Term::Fn>()) {
    const auto* fb = b->as<Term::Fn>();
    if (fa->op != fb->op || fa->args.size() != fb->args.size()) return false;
    for (size_t i = 0; i < fa->args.size(); ++i)
      if (!termEqualRec(fa->args[i], fb->args[i], ren)) return false;
    return true;
  }
  return false;
}

bool alphaEqualRec(const FormulaP& a, const FormulaP& b,
                   std::map<std::string, std::string>& ren) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  if (a->as<Formula::Top>()) return true;
  if (const auto* na = a->as<Formula::Neg>())
    return alphaEqualRec(na->f, b->as<Formula::Neg>()->f, ren);
  if (const auto* na = a->as<Formula::Or>()) {
    const auto* nb = b->as<Formula::Or>();
    return alphaEqualRec(na->l, nb->l, ren) && alphaEqualRec(na->r, nb->r, ren);
  }
  if (const auto* na = a->as<Formula::And>()) {
    const auto* nb = b->as<Formula::And>();
    return alphaEqualRec(na->l, nb->l, ren) && alphaEqualRec(na->r, nb->r, ren);
  }
  if (const auto* na = a->as<Formula::Cmp>()) {
    const auto* nb = b->as<Formula::Cmp>();
    return na->op == nb->op && termEqualRec(na->l, nb->l, ren) &&
           termEqualRec(na->r, nb->r, ren);
  }
  if (const auto* na = a->as<Formula::BoolAtom>())
    return termEqualRec(na->t, b->as<Formula::BoolAtom>()->t, ren);
  if (const auto* na = a->as<Formula::Pred>()) {
    const auto* nb = b->as<Formula::Pred>();
    if (na->name != nb->name || na->args.size() != nb->args.size()) return false;
    for (size_t i = 0; i < na->args.size(); ++i)
      if (!termEqualRec(na->args[i], nb->args[i], ren)) return false;
    return true;
  }
  if (const auto* na = a->as<Formula::Exists>()) {
    const auto* nb = b->as<Formula::Exists>();
    if (na->sort != nb->sort) return false;
    auto saved = ren;
    ren[na->var] = nb->var;
    bool ok = alphaEqualRec(na->body, nb->body, ren);
    ren = saved;
    return ok;
  }
  if (const auto* na = a->as<Formula::Forall>()) {
    const auto* nb = b->as<Formula::Forall>();
    if (na->sort != nb->sort) return false;
    auto saved = ren;
    ren[na->var] = nb->var;
    bool ok = alphaEqualRec(na->body, nb->body, ren);
    ren = saved;
    return ok;
  }
  if (a->as<Formula::Modal>()) return false;  // modalities compared by identity only
  return false;
}

}  // namespace

bool termEqual(const TermP& a, const TermP& b) {
  std::map<std::string, std::string> ren;
  return termEqualRec(a, b, ren);
}

bool alphaEqual(const FormulaP& a, const FormulaP& b) {
  std::map<std::string, std::string> ren;
  return alphaEqualRec(a, b, ren);
}

// ---------------------------------------------------------------------------
// Substitution.
// ---------------------------------------------------------------------------
namespace {

struct Subst {
  enum class What { Var, Result, Field } what;
  std::string name;    // var name, or field name
  std::string object;  // for fields
  TermP replacement;
};

TermP substTermRec(const TermP& t, const Subst& s, const std::set<std::string>& shadow);

FormulaP substRec(const FormulaP& f, const Subst& s, std::set<std::string> shadow) {
  if (!f) return f;
  struct V {
    const Subst& s;
    std::set<std::string>& shadow;
    const FormulaP& self;
    FormulaP operator()(const Formula::Top&) const { return self; }
    FormulaP operator()(const Formula::Neg& n) const { return mkNeg(substRec(n.f, s, shadow)); }
    FormulaP operator()(const Formula::Or& n) const {
      return mkOr(substRec(n.l, s, shadow), substRec(n.r, s, shadow));
    }
    FormulaP operator()(const Formula::And& n) const {
      return mkAnd(substRec(n.l, s, shadow), substRec(n.r, s, shadow));
    }
    FormulaP operator()(const Formula::Cmp& n) const {
      return mkCmp(n.op, substTermRec(n.l, s, shadow), substTermRec(n.r, s, shadow));
    }
    FormulaP operator()(const Formula::BoolAtom& n) const {
      return mkBoolAtom(substTermRec(n.t, s, shadow));
    }
    FormulaP operator()(const Formula::Pred& n) const {
      std::vector<TermP> args;
      args.reserve(n.args.size());
      for (const auto& a : n.args) args.push_back(substTermRec(a, s, shadow));
      return mkPred(n.name, std::move(args));
    }
    FormulaP operator()(const Formula::Exists& n) const {
      // Bound variables shadow program symbols of the same name; rename when
      // the replacement would capture the binder.
      std::string v = n.var;
      FormulaP body = n.body;
      std::set<std::string> replNames;
      walkTerm(s.replacement, [&](const Term& node) {
        if (const auto* var = std::get_if<Term::Var>(&node.node)) replNames.insert(var->name);
      });
      if (replNames.count(v)) {
        std::set<std::string> avoid = replNames;
        avoid.insert(v);
        for (const auto& fs : freeSymbols(body)) avoid.insert(fs.name);
        for (const auto& lv : freeLogicalVars(body)) avoid.insert(lv);
        std::string nv = freshName(v, avoid);
        body = substRec(body, Subst{Subst::What::Var, v, "", mkVar(nv, n.sort, VarRole::Logical)}, {});
        v = nv;
      }
      bool added = shadow.insert(v).second;
      FormulaP res = mkExists(n.sort, v, substRec(body, s, shadow));
      if (added) shadow.erase(v);
      return res;
    }
    FormulaP operator()(const Formula::Forall& n) const {
      std::string v = n.var;
      FormulaP body = n.body;
      std::set<std::string> replNames;
      walkTerm(s.replacement, [&](const Term& node) {
        if (const auto* var = std::get_if<Term::Var>(&node.node)) replNames.insert(var->name);
      });
      if (replNames.count(v)) {
        std::set<std::string> avoid = replNames;
        avoid.insert(v);
        for (const auto& fs : freeSymbols(body)) avoid.insert(fs.name);
        for (const auto& lv : freeLogicalVars(body)) avoid.insert(lv);
        std::string nv = freshName(v, avoid);
        body = substRec(body, Subst{Subst::What::Var, v, "", mkVar(nv, n.sort, VarRole::Logical)}, {});
        v = nv;
      }
      bool added = shadow.insert(v).second;
      FormulaP res = mkForall(n.sort, v, substRec(body, s, shadow));
      if (added) shadow.erase(v);
      return res;
    }
    FormulaP operator()(const Formula::Modal& n) const {
      return mkModal(n.stmt, substRec(n.body, s, shadow));
    }
  };
  return std::visit(V{s, shadow, f}, f->node);
}

TermP substTermRec(const TermP& t, const Subst& s, const std::set<std::string>& shadow) {
  if (!t) return t;
  if (const auto* v = t->as<Term::Var>()) {
    if (s.what == Subst::What::Var && v->name == s.name && !shadow.count(v->name))
      return s.replacement;
    return t;
  }
  if (t->as<Term::Result>()) {
    if (s.what == Subst::What::Result) return s.replacement;
    return t;
  }
  if (const auto* sel = t->as<Term::Select>()) {
    TermP heap = substTermRec(sel->heap, s, shadow);
    if (s.what == Subst::What::Field && sel->object == s.object && sel->field == s.name &&
        heap->as<Term::HeapSym>()) {
      return s.replacement;
    }
    if (heap == sel->heap) return t;
    return mkSelect(heap, sel->object, sel->field);
  }
  if (const auto* st = t->as<Term::Store>()) {
    return mkStore(substTermRec(st->heap, s, shadow), st->object, st->field,
                   substTermRec(st->value, s, shadow));
  }
  if (const auto* fn = t->as<Term::Fn>()) {
    std::vector<TermP> args;
    args.reserve(fn->args.size());
    for (const auto& a : fn->args) args.push_back(substTermRec(a, s, shadow));
    return mkFn(fn->op, std::move(args));
  }
  return t;
}

}  // namespace

FormulaP substVar(const FormulaP& f, const std::string& name, const TermP& replacement) {
  return substRec(f, Subst{Subst::What::Var, name, "", replacement}, {});
}
FormulaP substResult(const FormulaP& f, const TermP& replacement) {
  return substRec(f, Subst{Subst::What::Result, "", "", replacement}, {});
}
FormulaP substField(const FormulaP& f, const std::string& object, const std::string& field,
                    const TermP& replacement) {
  return substRec(f, Subst{Subst::What::Field, field, object, replacement}, {});
}
TermP substVarT(const TermP& t, const std::string& name, const TermP& replacement) {
  return substTermRec(t, Subst{Subst::What::Var, name, "", replacement}, {});
}

// ---------------------------------------------------------------------------
// Simplification: select/store axiom, ground arithmetic, boolean units.
// ---------------------------------------------------------------------------
TermP simplifyTerm(const TermP& t) {
  if (!t) return t;
  if (const auto* sel = t->as<Term::Select>()) {
    TermP heap = simplifyTerm(sel->heap);
    // select(store(h,o,f,v),o,f) = v; distinct object/field names commute.
    while (const auto* st = heap->as<Term::Store>()) {
      if (st->object == sel->object && st->field == sel->field) return simplifyTerm(st->value);
      heap = st->heap;  // different location: skip the store
    }
    if (heap == sel->heap) return t;
    return mkSelect(heap, sel->object, sel->field);
  }
  if (const auto* st = t->as<Term::Store>()) {
    return mkStore(simplifyTerm(st->heap), st->object, st->field, simplifyTerm(st->value));
  }
  if (const auto* fn = t->as<Term::Fn>()) {
    std::vector<TermP> args;
    bool ground = true;
    for (const auto& a : fn->args) {
      args.push_back(simplifyTerm(a));
      const auto* lit = args.back()->as<Term::Lit>();
      if (!lit || !std::holds_alternative<Int>(lit->v)) ground = false;
    }
    if (ground && args.size() == 2 && (fn->op == "+" || fn->op == "-" || fn->op == "*")) {
      Int a = std::get<Int>(args[0]->as<Term::Lit>()->v);
      Int b = std::get<Int>(args[1]->as<Term::Lit>()->v);
      Int r = fn->op == "+" ? a + b : fn->op == "-" ? a - b : a * b;
      return mkLit(r);
    }
    if (fn->op == "length" && args.size() == 1) {
      if (const auto* lit = args[0]->as<Term::Lit>()) {
        if (const auto* lv = std::get_if<ListVal>(&lit->v)) return mkLit((Int)lv->elems.size());
      }
    }
    return mkFn(fn->op, std::move(args));
  }
  return t;
}

FormulaP simplify(const FormulaP& f) {
  if (!f) return f;
  struct V {
    FormulaP operator()(const Formula::Top&) const { return mkTop(); }
    FormulaP operator()(const Formula::Neg& n) const {
      FormulaP b = simplify(n.f);
      if (isTop(b)) return mkNeg(mkTop());
      if (const auto* nn = b->as<Formula::Neg>()) return nn->f;
      return mkNeg(b);
    }
    FormulaP operator()(const Formula::Or& n) const {
      FormulaP l = simplify(n.l), r = simplify(n.r);
      if (isTop(l) || isTop(r)) return mkTop();
      const auto* nl = l->as<Formula::Neg>();
      const auto* nr = r->as<Formula::Neg>();
      if (nl && isTop(nl->f)) return r;
      if (nr && isTop(nr->f)) return l;
      return mkOr(l, r);
    }
    FormulaP operator()(const Formula::And& n) const {
      FormulaP l = simplify(n.l), r = simplify(n.r);
      if (isTop(l)) return r;
      if (isTop(r)) return l;
      const auto* nl = l->as<Formula::Neg>();
      const auto* nr = r->as<Formula::Neg>();
      if ((nl && isTop(nl->f)) || (nr && isTop(nr->f))) return mkBot();
      return mkAnd(l, r);
    }
    FormulaP operator()(const Formula::Cmp& n) const {
      TermP l = simplifyTerm(n.l), r = simplifyTerm(n.r);
      if (n.op == Formula::Cmp::Op::Eq && termEqual(l, r)) return mkTop();
      const auto* ll = l->as<Term::Lit>();
      const auto* rl = r->as<Term::Lit>();
      if (ll && rl) {
        if (n.op == Formula::Cmp::Op::Eq) return ll->v == rl->v ? mkTop() : mkBot();
        const Int* a = std::get_if<Int>(&ll->v);
        const Int* b = std::get_if<Int>(&rl->v);
        if (a && b) {
          bool res = n.op == Formula::Cmp::Op::Geq ? *a >= *b : *a > *b;
          return res ? mkTop() : mkBot();
        }
      }
      return mkCmp(n.op, l, r);
    }
    FormulaP operator()(const Formula::BoolAtom& n) const {
      TermP t = simplifyTerm(n.t);
      if (const auto* lit = t->as<Term::Lit>()) {
        if (const bool* b = std::get_if<bool>(&lit->v)) return *b ? mkTop() : mkBot();
      }
      return mkBoolAtom(t);
    }
    FormulaP operator()(const Formula::Pred& n) const {
      std::vector<TermP> args;
      for (const auto& a : n.args) args.push_back(simplifyTerm(a));
      return mkPred(n.name, std::move(args));
    }
    FormulaP operator()(const Formula::Exists& n) const {
      FormulaP b = simplify(n.body);
      if (isTop(b)) return mkTop();
      std::set<std::string> fl = freeLogicalVars(b);
      if (!fl.count(n.var)) return b;  // vacuous quantifier
      return mkExists(n.sort, n.var, b);
    }
    FormulaP operator()(const Formula::Forall& n) const {
      FormulaP b = simplify(n.body);
      if (isTop(b)) return mkTop();
      std::set<std::string> fl = freeLogicalVars(b);
      if (!fl.count(n.var)) return b;
      return mkForall(n.sort, n.var, b);
    }
    FormulaP operator()(const Formula::Modal& n) const { return mkModal(n.stmt, simplify(n.body)); }
  };
  return std::visit(V{}, f->node);
}

}  // namespace asyncst
