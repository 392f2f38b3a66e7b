#include <algorithm>
#include <functional>
#include <numeric>

#include "asyncst/logic.hpp"
#include "asyncst/pretty.hpp"

namespace asyncst {

// Decision pipeline for the supported fragment, per the module design:
// negate -> instantiate finite-character quantifiers (Bool/Unit and, via the
// fresh-distinct-witness construction, Fut/Obj/List) -> prenex the Int
// quantifiers -> DNF -> Fourier-Motzkin elimination with exactness tracking
// (strict bounds pre-tightened over Z; non-unit pivots mark the cube
// rationally-relaxed) -> per-cube congruence closure + integer witness
// search. Unknown is returned whenever a claim would rest on an inexact step.

namespace {

// ---------------------------------------------------------------------------
// Symbol interning.
// ---------------------------------------------------------------------------
struct SymTable {
  std::vector<std::string> names;   // display names
  std::vector<Sort> sorts;
  std::map<std::string, int> index;

  int intern(const std::string& key, const std::string& display, Sort sort) {
    auto it = index.find(key);
    if (it != index.end()) {
      if (sorts[it->second] == Sort::Unknown) sorts[it->second] = sort;
      return it->second;
    }
    int id = (int)names.size();
    index[key] = id;
    names.push_back(display);
    sorts.push_back(sort);
    return id;
  }
};

std::optional<std::pair<std::string, Sort>> atomKey(const TermP& t) {
  if (const auto* v = t->as<Term::Var>())
    return std::make_pair("v:" + v->owner + "::" + v->name, v->sort);
  if (const auto* s = t->as<Term::Select>()) {
    if (s->heap->as<Term::HeapSym>())
      return std::make_pair("f:" + s->object + "." + s->field, Sort::Unknown);
    return std::nullopt;
  }
  if (t->as<Term::Result>()) return std::make_pair(std::string("result"), Sort::Unknown);
  if (t->as<Term::SelfRef>()) return std::make_pair(std::string("self"), Sort::Obj);
  if (const auto* fn = t->as<Term::Fn>()) {
    // Opaque numeric pseudo-variable, e.g. length(xs).
    std::string k = fn->op + "(";
    for (const auto& a : fn->args) {
      auto sub = atomKey(a);
      if (!sub) return std::nullopt;
      k += sub->first + ",";
    }
    return std::make_pair("t:" + k + ")", Sort::Int);
  }
  return std::nullopt;
}

std::string displayOf(const TermP& t) { return prettyTerm(t); }

// ---------------------------------------------------------------------------
// Literals and cubes.
// ---------------------------------------------------------------------------
struct LinExpr {
  std::map<int, Int> coeff;  // symbol id -> coefficient
  Int cst = 0;

  void add(int sym, Int c) {
    if (c == 0) return;
    auto [it, fresh] = coeff.emplace(sym, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) coeff.erase(it);
    }
  }
  void addExpr(const LinExpr& o, Int scale) {
    cst += o.cst * scale;
    for (const auto& [s, c] : o.coeff) add(s, c * scale);
  }
  bool ground() const { return coeff.empty(); }
};

struct Lit {
  enum class K {
    IntGeq,   // expr >= 0
    IntEq,    // expr == 0
    AtomEq,   // a == b (non-numeric atoms/values)
    AtomNeq,  // a != b
    False,
    Unknown,
  } kind;
  LinExpr expr;
  // Atom operands: either interned symbols (id >= 0) or literal values.
  int aSym = -1, bSym = -1;
  std::optional<Value> aVal, bVal;
  std::string note;  // reason for Unknown
};

using Cube = std::vector<Lit>;
using Dnf = std::vector<Cube>;

enum class Dir { Exact, Over, Under, Both };

Dir flipDir(Dir d) {
  if (d == Dir::Over) return Dir::Under;
  if (d == Dir::Under) return Dir::Over;
  return d;
}
Dir joinDir(Dir a, Dir b) {
  if (a == Dir::Exact) return b;
  if (b == Dir::Exact) return a;
  if (a == b) return a;
  return Dir::Both;
}

// ---------------------------------------------------------------------------
// Sort inference pre-pass: propagate known sorts across equality atoms.
// ---------------------------------------------------------------------------
Sort termSortHint(const TermP& t, const std::map<std::string, Sort>& hints) {
  if (const auto* l = t->as<Term::Lit>()) return sortOfValue(l->v);
  if (const auto* v = t->as<Term::Var>()) {
    if (v->sort != Sort::Unknown) return v->sort;
    auto it = hints.find("v:" + v->owner + "::" + v->name);
    return it != hints.end() ? it->second : Sort::Unknown;
  }
  if (const auto* s = t->as<Term::Select>()) {
    auto it = hints.find("f:" + s->object + "." + s->field);
    return it != hints.end() ? it->second : Sort::Unknown;
  }
  if (t->as<Term::Result>()) {
    auto it = hints.find("result");
    return it != hints.end() ? it->second : Sort::Unknown;
  }
  if (t->as<Term::SelfRef>()) return Sort::Obj;
  if (t->as<Term::Fn>()) return Sort::Int;
  return Sort::Unknown;
}

void gatherSortHints(const FormulaP& f, std::map<std::string, Sort>& hints) {
  bool changed = true;
  auto setHint = [&](const TermP& t, Sort s) {
    if (s == Sort::Unknown) return;
    auto k = atomKey(t);
    if (!k) return;
    auto [it, fresh] = hints.emplace(k->first, s);
    if (!fresh && it->second == Sort::Unknown) it->second = s;
    else if (fresh) changed = true;
  };
  std::function<void(const FormulaP&)> walk = [&](const FormulaP& g) {
    if (!g) return;
    if (const auto* n = g->as<Formula::Neg>()) return walk(n->f);
    if (const auto* n = g->as<Formula::Or>()) { walk(n->l); walk(n->r); return; }
    if (const auto* n = g->as<Formula::And>()) { walk(n->l); walk(n->r); return; }
    if (const auto* n = g->as<Formula::Exists>()) return walk(n->body);
    if (const auto* n = g->as<Formula::Forall>()) return walk(n->body);
    if (const auto* n = g->as<Formula::BoolAtom>()) { setHint(n->t, Sort::Bool); return; }
    if (const auto* n = g->as<Formula::Cmp>()) {
      if (n->op != Formula::Cmp::Op::Eq) {
        setHint(n->l, Sort::Int);
        setHint(n->r, Sort::Int);
        return;
      }
      Sort sl = termSortHint(n->l, hints);
      Sort sr = termSortHint(n->r, hints);
      if (sl != Sort::Unknown) setHint(n->r, sl);
      if (sr != Sort::Unknown) setHint(n->l, sr);
      return;
    }
  };
  for (int round = 0; round < 4 && changed; ++round) {
    changed = false;
    walk(f);
  }
}

// ---------------------------------------------------------------------------
// Finite-sort quantifier instantiation.
// ---------------------------------------------------------------------------

// Terms directly compared with the bound variable; their equalities are the
// only way the variable's value matters in the fragment.
void comparedTerms(const FormulaP& f, const std::string& var, std::vector<TermP>& out) {
  auto isVar = [&](const TermP& t) {
    const auto* v = t->as<Term::Var>();
    return v && v->role == VarRole::Logical && v->name == var;
  };
  auto push = [&](const TermP& t) {
    for (const auto& x : out)
      if (termEqual(x, t)) return;
    out.push_back(t);
  };
  std::function<void(const FormulaP&)> walk = [&](const FormulaP& g) {
    if (!g) return;
    if (const auto* n = g->as<Formula::Neg>()) return walk(n->f);
    if (const auto* n = g->as<Formula::Or>()) { walk(n->l); walk(n->r); return; }
    if (const auto* n = g->as<Formula::And>()) { walk(n->l); walk(n->r); return; }
    if (const auto* n = g->as<Formula::Exists>()) {
      if (n->var != var) walk(n->body);
      return;
    }
    if (const auto* n = g->as<Formula::Forall>()) {
      if (n->var != var) walk(n->body);
      return;
    }
    if (const auto* n = g->as<Formula::Cmp>()) {
      if (n->op != Formula::Cmp::Op::Eq) return;
      if (isVar(n->l) && !isVar(n->r)) push(n->r);
      if (isVar(n->r) && !isVar(n->l)) push(n->l);
      return;
    }
  };
  walk(f);
}

// Rewrites every equality atom mentioning the marker variable to bottom: the
// marker denotes a value distinct from all enumerated terms, so in the
// equality-only fragment those atoms are false. If the marker survives in any
// other position the fragment is violated and an uninterpreted predicate is
// injected (the solver maps it to Unknown).
FormulaP killMarkerEqualities(const FormulaP& f, const std::string& marker) {
  auto isMarker = [&](const TermP& t) {
    const auto* v = t->as<Term::Var>();
    return v && v->role == VarRole::Logical && v->name == marker;
  };
  std::function<FormulaP(const FormulaP&)> walk = [&](const FormulaP& g) -> FormulaP {
    if (const auto* n = g->as<Formula::Neg>()) return mkNeg(walk(n->f));
    if (const auto* n = g->as<Formula::Or>()) return mkOr(walk(n->l), walk(n->r));
    if (const auto* n = g->as<Formula::And>()) return mkAnd(walk(n->l), walk(n->r));
    if (const auto* n = g->as<Formula::Exists>())
      return mkExists(n->sort, n->var, walk(n->body));
    if (const auto* n = g->as<Formula::Forall>())
      return mkForall(n->sort, n->var, walk(n->body));
    if (const auto* n = g->as<Formula::Cmp>()) {
      if (n->op == Formula::Cmp::Op::Eq && (isMarker(n->l) || isMarker(n->r))) return mkBot();
      return g;
    }
    return g;
  };
  FormulaP out = walk(f);
  if (freeLogicalVars(out).count(marker))
    return mkPred("#fragment", {mkVar(marker, Sort::Unknown, VarRole::Logical)});
  return out;
}

FormulaP instantiateFinite(const FormulaP& f, int& salt);

// Replaces one Bool/Unit/Fut/Obj/List quantifier by a finite case split. The
// fresh-witness case carries explicit distinctness from the compared terms
// (the domains are infinite, so a distinct value always exists).
FormulaP instantiateQuant(Sort sort, const std::string& var, const FormulaP& rawBody,
                          bool isExists, int& salt) {
  FormulaP body = instantiateFinite(rawBody, salt);
  if (sort == Sort::Int) {
    return isExists ? mkExists(sort, var, body) : mkForall(sort, var, body);
  }
  std::vector<FormulaP> cases;
  auto inst = [&](const TermP& t) { cases.push_back(substVar(body, var, t)); };
  if (sort == Sort::Bool) {
    inst(mkLit(true));
    inst(mkLit(false));
  } else if (sort == Sort::UnitS) {
    inst(mkLit(Unit{}));
  } else {
    std::vector<TermP> terms;
    comparedTerms(body, var, terms);
    if (sort == Sort::List) {
      bool hasNil = false;
      for (const auto& t : terms) {
        const auto* l = t->as<Term::Lit>();
        if (l && std::holds_alternative<ListVal>(l->v) && std::get<ListVal>(l->v).nil())
          hasNil = true;
      }
      if (!hasNil) terms.push_back(mkLit(ListVal{}));
    }
    for (const auto& t : terms) inst(t);
    // The values-equal-to-none-of-the-terms case: in the equality-only
    // fragment all such values satisfy the body identically.
    std::string marker = "#other" + std::to_string(++salt);
    FormulaP other = substVar(body, var, mkVar(marker, sort, VarRole::Logical));
    cases.push_back(killMarkerEqualities(other, marker));
  }
  FormulaP acc = cases.front();
  for (size_t i = 1; i < cases.size(); ++i)
    acc = isExists ? mkOr(acc, cases[i]) : mkAnd(acc, cases[i]);
  return acc;
}

FormulaP instantiateFinite(const FormulaP& f, int& salt) {
  if (!f) return f;
  if (const auto* n = f->as<Formula::Neg>()) return mkNeg(instantiateFinite(n->f, salt));
  if (const auto* n = f->as<Formula::Or>())
    return mkOr(instantiateFinite(n->l, salt), instantiateFinite(n->r, salt));
  if (const auto* n = f->as<Formula::And>())
    return mkAnd(instantiateFinite(n->l, salt), instantiateFinite(n->r, salt));
  if (const auto* n = f->as<Formula::Exists>())
    return instantiateQuant(n->sort, n->var, n->body, true, salt);
  if (const auto* n = f->as<Formula::Forall>())
    return instantiateQuant(n->sort, n->var, n->body, false, salt);
  return f;
}

// ---------------------------------------------------------------------------
// Prenex (Int quantifiers only remain at this point).
// ---------------------------------------------------------------------------
struct Prefix {
  std::vector<std::pair<bool, std::string>> quants;  // (isExists, var)
};

FormulaP standardizeApart(const FormulaP& f, std::set<std::string>& used) {
  if (!f) return f;
  struct V {
    std::set<std::string>& used;
    const FormulaP& self;
    FormulaP operator()(const Formula::Top&) const { return self; }
    FormulaP operator()(const Formula::Neg& n) const {
      return mkNeg(standardizeApart(n.f, used));
    }
    FormulaP operator()(const Formula::Or& n) const {
      return mkOr(standardizeApart(n.l, used), standardizeApart(n.r, used));
    }
    FormulaP operator()(const Formula::And& n) const {
      return mkAnd(standardizeApart(n.l, used), standardizeApart(n.r, used));
    }
    FormulaP operator()(const Formula::Cmp&) const { return self; }
    FormulaP operator()(const Formula::BoolAtom&) const { return self; }
    FormulaP operator()(const Formula::Pred&) const { return self; }
    FormulaP operator()(const Formula::Exists& n) const {
      std::string nv = freshName(n.var, used);
      used.insert(nv);
      FormulaP body = n.body;
      if (nv != n.var) body = substVar(body, n.var, mkVar(nv, n.sort, VarRole::Logical));
      return mkExists(n.sort, nv, standardizeApart(body, used));
    }
    FormulaP operator()(const Formula::Forall& n) const {
      std::string nv = freshName(n.var, used);
      used.insert(nv);
      FormulaP body = n.body;
      if (nv != n.var) body = substVar(body, n.var, mkVar(nv, n.sort, VarRole::Logical));
      return mkForall(n.sort, nv, standardizeApart(body, used));
    }
    FormulaP operator()(const Formula::Modal&) const { return self; }
  };
  return std::visit(V{used, f}, f->node);
}

// NNF with quantifier polarity applied; then pulls the prefix out.
FormulaP toNNF(const FormulaP& f, bool pos) {
  if (f->as<Formula::Top>()) return pos ? mkTop() : mkBot();
  if (const auto* n = f->as<Formula::Neg>()) return toNNF(n->f, !pos);
  if (const auto* n = f->as<Formula::Or>()) {
    FormulaP l = toNNF(n->l, pos), r = toNNF(n->r, pos);
    return pos ? mkOr(l, r) : mkAnd(l, r);
  }
  if (const auto* n = f->as<Formula::And>()) {
    FormulaP l = toNNF(n->l, pos), r = toNNF(n->r, pos);
    return pos ? mkAnd(l, r) : mkOr(l, r);
  }
  if (const auto* n = f->as<Formula::Exists>()) {
    FormulaP b = toNNF(n->body, pos);
    return pos ? mkExists(n->sort, n->var, b) : mkForall(n->sort, n->var, b);
  }
  if (const auto* n = f->as<Formula::Forall>()) {
    FormulaP b = toNNF(n->body, pos);
    return pos ? mkForall(n->sort, n->var, b) : mkExists(n->sort, n->var, b);
  }
  return pos ? f : mkNeg(f);  // atoms keep an explicit negation marker
}

FormulaP pullPrefix(const FormulaP& f, Prefix& prefix) {
  if (const auto* n = f->as<Formula::Exists>()) {
    prefix.quants.emplace_back(true, n->var);
    return pullPrefix(n->body, prefix);
  }
  if (const auto* n = f->as<Formula::Forall>()) {
    prefix.quants.emplace_back(false, n->var);
    return pullPrefix(n->body, prefix);
  }
  if (const auto* n = f->as<Formula::Or>()) {
    FormulaP l = pullPrefix(n->l, prefix);
    FormulaP r = pullPrefix(n->r, prefix);
    return mkOr(l, r);
  }
  if (const auto* n = f->as<Formula::And>()) {
    FormulaP l = pullPrefix(n->l, prefix);
    FormulaP r = pullPrefix(n->r, prefix);
    return mkAnd(l, r);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Matrix -> DNF.
// ---------------------------------------------------------------------------
struct Builder {
  SymTable& syms;
  const std::map<std::string, Sort>& hints;

  std::optional<LinExpr> linearize(const TermP& t) {
    LinExpr e;
    if (!linAcc(t, 1, e)) return std::nullopt;
    return e;
  }
  bool linAcc(const TermP& t, Int scale, LinExpr& e) {
    if (const auto* l = t->as<Term::Lit>()) {
      const Int* n = std::get_if<Int>(&l->v);
      if (!n) return false;
      e.cst += *n * scale;
      return true;
    }
    if (const auto* fn = t->as<Term::Fn>()) {
      if (fn->op == "+") return linAcc(fn->args[0], scale, e) && linAcc(fn->args[1], scale, e);
      if (fn->op == "-") return linAcc(fn->args[0], scale, e) && linAcc(fn->args[1], -scale, e);
      if (fn->op == "*") {
        const auto* la = fn->args[0]->as<Term::Lit>();
        const auto* lb = fn->args[1]->as<Term::Lit>();
        const Int* ca = la ? std::get_if<Int>(&la->v) : nullptr;
        const Int* cb = lb ? std::get_if<Int>(&lb->v) : nullptr;
        if (ca) return linAcc(fn->args[1], scale * *ca, e);
        if (cb) return linAcc(fn->args[0], scale * *cb, e);
        return false;  // nonlinear
      }
      if (fn->op == "length") {
        auto k = atomKey(t);
        if (!k) return false;
        e.add(syms.intern(k->first, displayOf(t), Sort::Int), scale);
        return true;
      }
      return false;
    }
    auto k = atomKey(t);
    if (!k) return false;
    e.add(syms.intern(k->first, displayOf(t), Sort::Int), scale);
    return true;
  }

  Sort sortOfTermB(const TermP& t) {
    Sort s = termSortHint(t, hints);
    return s;
  }

  Lit atomLit(const TermP& a, const TermP& b, bool eq) {
    Lit lit;
    lit.kind = eq ? Lit::K::AtomEq : Lit::K::AtomNeq;
    auto setSide = [&](const TermP& t, int& sym, std::optional<Value>& val) -> bool {
      if (const auto* l = t->as<Term::Lit>()) {
        val = l->v;
        return true;
      }
      auto k = atomKey(t);
      if (!k) return false;
      sym = syms.intern(k->first, displayOf(t), sortOfTermB(t));
      return true;
    };
    if (!setSide(a, lit.aSym, lit.aVal) || !setSide(b, lit.bSym, lit.bVal)) {
      lit.kind = Lit::K::Unknown;
      lit.note = "non-atomic operand in equality";
    }
    return lit;
  }

  // pos: literal polarity.
  std::vector<Cube> litFor(const Formula::Cmp& c, bool pos) {
    bool numeric = false;
    Sort sl = sortOfTermB(c.l), sr = sortOfTermB(c.r);
    if (c.op != Formula::Cmp::Op::Eq) numeric = true;
    if (sl == Sort::Int || sr == Sort::Int) numeric = true;
    if (c.l->as<Term::Fn>() || c.r->as<Term::Fn>()) numeric = true;
    if (numeric) {
      auto le = linearize(c.l);
      auto re = linearize(c.r);
      if (!le || !re) {
        Lit lit;
        lit.kind = Lit::K::Unknown;
        lit.note = "nonlinear or non-integer arithmetic";
        return {{lit}};
      }
      LinExpr d;  // l - r
      d.addExpr(*le, 1);
      d.addExpr(*re, -1);
      auto geq = [&](LinExpr e, Int shift) {
        e.cst += shift;
        Lit lit;
        lit.kind = Lit::K::IntGeq;
        lit.expr = std::move(e);
        return lit;
      };
      auto negOf = [&](const LinExpr& e) {
        LinExpr m;
        m.addExpr(e, -1);
        return m;
      };
      switch (c.op) {
        case Formula::Cmp::Op::Geq:
          if (pos) return {{geq(d, 0)}};
          return {{geq(negOf(d), -1)}};  // l < r  <=>  r - l - 1 >= 0
        case Formula::Cmp::Op::Gt:
          if (pos) return {{geq(d, -1)}};  // l - r - 1 >= 0
          return {{geq(negOf(d), 0)}};
        case Formula::Cmp::Op::Eq: {
          if (pos) {
            Lit lit;
            lit.kind = Lit::K::IntEq;
            lit.expr = d;
            return {{lit}};
          }
          // l != r over Z: split.
          return {{geq(d, -1)}, {geq(negOf(d), -1)}};
        }
      }
    }
    return {{atomLit(c.l, c.r, pos)}};
  }

  std::vector<Cube> litForBool(const TermP& t, bool pos) {
    return {{atomLit(t, mkLit(pos), true)}};
  }
};

Dnf dnfAnd(const Dnf& a, const Dnf& b) {
  Dnf out;
  for (const auto& ca : a)
    for (const auto& cb : b) {
      Cube c = ca;
      c.insert(c.end(), cb.begin(), cb.end());
      out.push_back(std::move(c));
    }
  return out;
}

Dnf toDnf(const FormulaP& f, Builder& b, bool pos) {
  if (f->as<Formula::Top>()) {
    if (pos) return {{}};  // one empty cube = true
    return {};             // no cubes = false
  }
  if (const auto* n = f->as<Formula::Neg>()) return toDnf(n->f, b, !pos);
  if (const auto* n = f->as<Formula::Or>()) {
    if (pos) {
      Dnf l = toDnf(n->l, b, true), r = toDnf(n->r, b, true);
      l.insert(l.end(), r.begin(), r.end());
      return l;
    }
    return dnfAnd(toDnf(n->l, b, false), toDnf(n->r, b, false));
  }
  if (const auto* n = f->as<Formula::And>()) {
    if (pos) return dnfAnd(toDnf(n->l, b, true), toDnf(n->r, b, true));
    Dnf l = toDnf(n->l, b, false), r = toDnf(n->r, b, false);
    l.insert(l.end(), r.begin(), r.end());
    return l;
  }
  if (const auto* n = f->as<Formula::Cmp>()) return b.litFor(*n, pos);
  if (const auto* n = f->as<Formula::BoolAtom>()) return b.litForBool(n->t, pos);
  if (f->as<Formula::Pred>()) {
    Lit lit;
    lit.kind = Lit::K::Unknown;
    lit.note = "uninterpreted predicate";
    return {{lit}};
  }
  throw InternalError("quantifier inside DNF conversion");
}

// Complements a full DNF (for forall-elimination).
Dnf negateDnf(const Dnf& d) {
  Dnf acc = {{}};  // true
  for (const auto& cube : d) {
    // ~cube = disjunction of complemented literals
    Dnf disj;
    for (const Lit& lit : cube) {
      Lit c = lit;
      switch (lit.kind) {
        case Lit::K::IntGeq: {
          LinExpr m;
          m.addExpr(lit.expr, -1);
          m.cst -= 1;
          c.expr = m;
          disj.push_back({c});
          break;
        }
        case Lit::K::IntEq: {
          Lit g1;
          g1.kind = Lit::K::IntGeq;
          g1.expr = lit.expr;
          g1.expr.cst -= 1;
          Lit g2;
          g2.kind = Lit::K::IntGeq;
          LinExpr m;
          m.addExpr(lit.expr, -1);
          m.cst -= 1;
          g2.expr = m;
          disj.push_back({g1});
          disj.push_back({g2});
          break;
        }
        case Lit::K::AtomEq:
          c.kind = Lit::K::AtomNeq;
          disj.push_back({c});
          break;
        case Lit::K::AtomNeq:
          c.kind = Lit::K::AtomEq;
          disj.push_back({c});
          break;
        case Lit::K::False:
          // ~false = true: this literal contributes a tautological cube.
          disj.push_back({});
          break;
        case Lit::K::Unknown:
          disj.push_back({c});
          break;
      }
    }
    acc = dnfAnd(acc, disj);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin elimination of one variable from one cube.
// ---------------------------------------------------------------------------
struct ElimResult {
  std::vector<Cube> cubes;  // usually one
  Dir dir = Dir::Exact;
};

ElimResult eliminateVar(const Cube& cube, int sym) {
  ElimResult res;
  Cube rest;
  std::vector<LinExpr> eqs;     // expr == 0 containing sym
  std::vector<LinExpr> geqs;    // expr >= 0 containing sym
  for (const Lit& lit : cube) {
    bool has = (lit.kind == Lit::K::IntGeq || lit.kind == Lit::K::IntEq) &&
               lit.expr.coeff.count(sym);
    if (!has) {
      rest.push_back(lit);
      continue;
    }
    if (lit.kind == Lit::K::IntEq) eqs.push_back(lit.expr);
    else geqs.push_back(lit.expr);
  }
  if (eqs.empty() && geqs.empty()) {
    res.cubes.push_back(rest);
    return res;
  }
  if (!eqs.empty()) {
    // Substitute using c*sym + e == 0.
    LinExpr eq = eqs[0];
    Int c = eq.coeff[sym];
    eq.coeff.erase(sym);
    if (c < 0) {
      LinExpr m;
      m.addExpr(eq, -1);
      eq = m;
      c = -c;
    }
    // sym = -eq / c ; scale other atoms by c.
    if (c != 1) res.dir = Dir::Over;  // divisibility lost over Z
    Cube out = rest;
    auto substInto = [&](const LinExpr& e, bool isEq) {
      LinExpr r;
      Int a = 0;
      for (const auto& [s, k] : e.coeff)
        if (s == sym) a = k;
      r.cst = e.cst * c;
      for (const auto& [s, k] : e.coeff)
        if (s != sym) r.add(s, k * c);
      r.addExpr(eq, -a);
      Lit lit;
      lit.kind = isEq ? Lit::K::IntEq : Lit::K::IntGeq;
      lit.expr = r;
      out.push_back(lit);
    };
    for (size_t i = 1; i < eqs.size(); ++i) substInto(eqs[i], true);
    for (const auto& g : geqs) substInto(g, false);
    res.cubes.push_back(out);
    return res;
  }
  // Pure inequalities: combine lower and upper bounds.
  std::vector<LinExpr> lowers, uppers;  // a*sym + e >= 0 : a>0 lower, a<0 upper
  for (const auto& g : geqs) {
    Int a = g.coeff.at(sym);
    if (a > 0) lowers.push_back(g);
    else uppers.push_back(g);
  }
  Cube out = rest;
  if (!lowers.empty() && !uppers.empty()) {
    for (const auto& lo : lowers) {
      for (const auto& up : uppers) {
        Int a = lo.coeff.at(sym);    // > 0
        Int b = -up.coeff.at(sym);   // > 0
        if (a != 1 && b != 1) res.dir = Dir::Over;
        LinExpr comb;  // b*lo + a*up without sym
        for (const auto& [s, k] : lo.coeff)
          if (s != sym) comb.add(s, k * b);
        for (const auto& [s, k] : up.coeff)
          if (s != sym) comb.add(s, k * a);
        comb.cst = lo.cst * b + up.cst * a;
        Lit lit;
        lit.kind = Lit::K::IntGeq;
        lit.expr = comb;
        out.push_back(lit);
      }
    }
  }
  res.cubes.push_back(out);
  return res;
}

std::pair<Dnf, Dir> eliminateExists(const Dnf& d, int sym) {
  Dnf out;
  Dir dir = Dir::Exact;
  for (const Cube& cube : d) {
    ElimResult r = eliminateVar(cube, sym);
    dir = joinDir(dir, r.dir);
    for (auto& c : r.cubes) out.push_back(std::move(c));
  }
  return {out, dir};
}

// ---------------------------------------------------------------------------
// Cube solving (free symbols only).
// ---------------------------------------------------------------------------
struct UnionFind {
  std::vector<int> parent;
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

struct CubeOutcome {
  enum class K { Sat, Unsat, Unknown } kind;
  std::map<std::string, Value> model;  // display name -> value
  std::string note;
};

struct RatWitness {
  // numerator/denominator per symbol
  std::map<int, std::pair<Int, Int>> val;
};

bool intFeasible(const std::vector<LinExpr>& geqs, const std::vector<LinExpr>& eqs,
                 const std::vector<int>& vars, std::map<int, Int>& model) {
  // Small box search around 0 sized by the constants involved.
  Int bound = 2;
  for (const auto& e : geqs) bound = std::max(bound, std::abs(e.cst));
  for (const auto& e : eqs) bound = std::max(bound, std::abs(e.cst));
  bound = std::min<Int>(bound + 2, 14);
  if (vars.size() > 4) return false;
  // Candidates ordered 0, 1, -1, 2, -2, ... so witnesses come out small.
  std::vector<Int> candidates;
  candidates.push_back(0);
  for (Int v = 1; v <= bound; ++v) {
    candidates.push_back(v);
    candidates.push_back(-v);
  }
  std::vector<size_t> idx(vars.size(), 0);
  std::vector<Int> assign(vars.size(), 0);
  auto check = [&]() {
    auto evalE = [&](const LinExpr& e) {
      Int v = e.cst;
      for (const auto& [s, c] : e.coeff) {
        auto it = std::find(vars.begin(), vars.end(), s);
        if (it == vars.end()) return std::optional<Int>{};
        v += c * assign[it - vars.begin()];
      }
      return std::optional<Int>{v};
    };
    for (const auto& e : geqs) {
      auto v = evalE(e);
      if (!v || *v < 0) return false;
    }
    for (const auto& e : eqs) {
      auto v = evalE(e);
      if (!v || *v != 0) return false;
    }
    return true;
  };
  for (;;) {
    if (check()) {
      for (size_t i = 0; i < vars.size(); ++i) model[vars[i]] = assign[i];
      return true;
    }
    size_t i = 0;
    while (i < idx.size() && idx[i] + 1 == candidates.size()) {
      idx[i] = 0;
      assign[i] = candidates[0];
      ++i;
    }
    if (i == idx.size()) return false;
    ++idx[i];
    assign[i] = candidates[idx[i]];
  }
}

CubeOutcome solveCube(const Cube& cube, SymTable& syms) {
  CubeOutcome out;
  for (const Lit& lit : cube) {
    if (lit.kind == Lit::K::Unknown) {
      out.kind = CubeOutcome::K::Unknown;
      out.note = lit.note;
      return out;
    }
    if (lit.kind == Lit::K::False) {
      out.kind = CubeOutcome::K::Unsat;
      return out;
    }
  }

  // --- Non-numeric congruence. Atom universe: symbols + distinct values.
  std::vector<std::optional<Value>> valueOf(syms.names.size());
  UnionFind uf;
  uf.parent.resize(syms.names.size());
  std::iota(uf.parent.begin(), uf.parent.end(), 0);
  std::vector<std::pair<int, Value>> valueNodes;  // extra nodes for literal values
  auto nodeForValue = [&](const Value& v) {
    for (auto& [id, val] : valueNodes)
      if (valueEq(val, v)) return id;
    int id = (int)uf.parent.size();
    uf.parent.push_back(id);
    valueNodes.emplace_back(id, v);
    return id;
  };
  auto litNode = [&](int sym, const std::optional<Value>& val) {
    return sym >= 0 ? sym : nodeForValue(*val);
  };
  std::vector<std::pair<int, int>> disequalities;
  for (const Lit& lit : cube) {
    if (lit.kind == Lit::K::AtomEq)
      uf.unite(litNode(lit.aSym, lit.aVal), litNode(lit.bSym, lit.bVal));
    else if (lit.kind == Lit::K::AtomNeq)
      disequalities.emplace_back(litNode(lit.aSym, lit.aVal), litNode(lit.bSym, lit.bVal));
  }
  // Distinct literal values merged -> contradiction. Lists: only the Nil /
  // non-Nil distinction is observable, so [0] == [7] stays consistent.
  for (size_t i = 0; i < valueNodes.size(); ++i) {
    for (size_t j = i + 1; j < valueNodes.size(); ++j) {
      if (uf.find(valueNodes[i].first) != uf.find(valueNodes[j].first)) continue;
      const Value& a = valueNodes[i].second;
      const Value& b = valueNodes[j].second;
      const ListVal* la = std::get_if<ListVal>(&a);
      const ListVal* lb = std::get_if<ListVal>(&b);
      bool conflict;
      if (la && lb) conflict = la->nil() != lb->nil();
      else conflict = !valueEq(a, b);
      if (conflict) {
        out.kind = CubeOutcome::K::Unsat;
        return out;
      }
    }
  }
  for (const auto& [a, b] : disequalities) {
    if (uf.find(a) == uf.find(b)) {
      out.kind = CubeOutcome::K::Unsat;
      return out;
    }
  }

  // --- Numeric part.
  std::vector<LinExpr> geqs, eqs;
  std::set<int> numVarsSet;
  for (const Lit& lit : cube) {
    if (lit.kind == Lit::K::IntGeq) {
      if (lit.expr.ground()) {
        if (lit.expr.cst < 0) {
          out.kind = CubeOutcome::K::Unsat;
          return out;
        }
        continue;
      }
      geqs.push_back(lit.expr);
      for (const auto& [s, c] : lit.expr.coeff) numVarsSet.insert(s);
    } else if (lit.kind == Lit::K::IntEq) {
      if (lit.expr.ground()) {
        if (lit.expr.cst != 0) {
          out.kind = CubeOutcome::K::Unsat;
          return out;
        }
        continue;
      }
      eqs.push_back(lit.expr);
      for (const auto& [s, c] : lit.expr.coeff) numVarsSet.insert(s);
    }
  }
  std::map<int, Int> numModel;
  if (!numVarsSet.empty()) {
    // FM feasibility: eliminate every variable; a ground contradiction means
    // rationally infeasible (hence integer-infeasible).
    Dnf probe = {Cube{}};
    Cube& pc = probe[0];
    for (const auto& e : geqs) {
      Lit l;
      l.kind = Lit::K::IntGeq;
      l.expr = e;
      pc.push_back(l);
    }
    for (const auto& e : eqs) {
      Lit l;
      l.kind = Lit::K::IntEq;
      l.expr = e;
      pc.push_back(l);
    }
    Dir dir = Dir::Exact;
    Dnf cur = probe;
    for (int v : numVarsSet) {
      auto [next, d] = eliminateExists(cur, v);
      dir = joinDir(dir, d);
      cur = next;
    }
    bool ratFeasible = false;
    for (const Cube& c : cur) {
      bool ok = true;
      for (const Lit& l : c) {
        if (l.kind == Lit::K::IntGeq && l.expr.ground() && l.expr.cst < 0) ok = false;
        if (l.kind == Lit::K::IntEq && l.expr.ground() && l.expr.cst != 0) ok = false;
      }
      if (ok) {
        ratFeasible = true;
        break;
      }
    }
    if (!ratFeasible) {
      out.kind = CubeOutcome::K::Unsat;
      return out;
    }
    std::vector<int> vars(numVarsSet.begin(), numVarsSet.end());
    if (!intFeasible(geqs, eqs, vars, numModel)) {
      out.kind = CubeOutcome::K::Unknown;
      out.note = dir == Dir::Exact ? "no small integer witness found"
                                   : "rational feasibility only";
      return out;
    }
  }

  // --- Model assembly.
  out.kind = CubeOutcome::K::Sat;
  // Class representative values.
  std::map<int, Value> classValue;
  for (const auto& [node, v] : valueNodes) classValue[uf.find(node)] = v;
  int freshFut = 500, freshObj = 0, freshList = 50;
  for (size_t i = 0; i < syms.names.size(); ++i) {
    int root = uf.find((int)i);
    Sort sort = syms.sorts[i];
    if (numModel.count((int)i)) {
      out.model[syms.names[i]] = numModel[(int)i];
      continue;
    }
    if (sort == Sort::Int || sort == Sort::Unknown) {
      auto cv = classValue.find(root);
      if (cv != classValue.end() && std::holds_alternative<Int>(cv->second))
        out.model[syms.names[i]] = cv->second;
      else
        out.model[syms.names[i]] = (Int)0;
      continue;
    }
    auto cv = classValue.find(root);
    if (cv == classValue.end()) {
      Value v;
      switch (sort) {
        case Sort::Fut: v = FutId{freshFut + root}; break;
        case Sort::Obj: v = ObjRef{"o" + std::to_string(freshObj + root)}; break;
        case Sort::List: v = ListVal{{(Int)(freshList + root)}}; break;
        case Sort::Bool: v = false; break;
        default: v = Unit{}; break;
      }
      classValue[root] = v;
      cv = classValue.find(root);
    }
    out.model[syms.names[i]] = cv->second;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry point.
// ---------------------------------------------------------------------------
ValidityResult checkValidity(const FormulaP& phi) {
  ValidityResult res;
  if (containsModal(phi)) {
    res.kind = ValidityResult::K::Unknown;
    res.reason = "modalities are outside the validity fragment";
    return res;
  }
  FormulaP neg = simplify(mkNeg(simplify(phi)));
  if (neg->as<Formula::Neg>() && isTop(neg->as<Formula::Neg>()->f)) {
    res.kind = ValidityResult::K::Valid;
    return res;
  }
  if (isTop(neg)) {
    res.kind = ValidityResult::K::NotValid;
    return res;
  }

  std::map<std::string, Sort> hints;
  gatherSortHints(neg, hints);

  int salt = 0;
  FormulaP finite = instantiateFinite(neg, salt);
  std::set<std::string> used = freeLogicalVars(finite);
  for (const auto& s : freeSymbols(finite)) used.insert(s.name);
  FormulaP apart = standardizeApart(finite, used);
  FormulaP nnf = toNNF(apart, true);
  Prefix prefix;
  FormulaP matrix = pullPrefix(nnf, prefix);

  SymTable syms;
  Builder b{syms, hints};
  Dnf dnf;
  try {
    dnf = toDnf(matrix, b, true);
  } catch (const InternalError& e) {
    res.kind = ValidityResult::K::Unknown;
    res.reason = e.what();
    return res;
  }

  // Eliminate the Int prefix innermost-first.
  Dir dir = Dir::Exact;
  for (auto it = prefix.quants.rbegin(); it != prefix.quants.rend(); ++it) {
    const auto& [isExists, var] = *it;
    auto key = syms.index.find("v:::" + var);
    int sym = key == syms.index.end() ? syms.intern("v:::" + var, var, Sort::Int)
                                      : key->second;
    if (isExists) {
      auto [next, d] = eliminateExists(dnf, sym);
      dnf = std::move(next);
      dir = joinDir(dir, d);
    } else {
      Dnf negd = negateDnf(dnf);
      auto [next, d] = eliminateExists(negd, sym);
      dnf = negateDnf(next);
      dir = joinDir(flipDir(joinDir(flipDir(dir), d)), Dir::Exact);
    }
  }

  bool sawUnknown = false;
  for (const Cube& cube : dnf) {
    CubeOutcome oc = solveCube(cube, syms);
    if (oc.kind == CubeOutcome::K::Sat) {
      // A model of the negation refutes phi.
      bool claimOk = (dir == Dir::Exact || dir == Dir::Under);
      if (claimOk) {
        res.kind = ValidityResult::K::NotValid;
        res.counterexample = std::move(oc.model);
        return res;
      }
      sawUnknown = true;
      continue;
    }
    if (oc.kind == CubeOutcome::K::Unknown) {
      sawUnknown = true;
      if (res.reason.empty()) res.reason = oc.note;
    }
  }
  if (sawUnknown) {
    res.kind = ValidityResult::K::Unknown;
    if (res.reason.empty()) res.reason = "approximate elimination";
    return res;
  }
  // Every cube of the negation is unsatisfiable.
  if (dir == Dir::Exact || dir == Dir::Over) {
    res.kind = ValidityResult::K::Valid;
  } else {
    res.kind = ValidityResult::K::Unknown;
    res.reason = "under-approximate elimination refuted";
  }
  return res;
}

}  // namespace asyncst
