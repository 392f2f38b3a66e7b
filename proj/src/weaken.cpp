#include <functional>

#include "asyncst/logic.hpp"

namespace asyncst {

namespace {

// A symbol occurrence eligible for replacement, in first-occurrence order.
struct ReplKey {
  bool isField;
  std::string owner;
  std::string name;
  bool operator==(const ReplKey&) const = default;
};

// Collects replaceable symbols in deterministic (left-to-right) order.
void collectOrdered(const FormulaP& f, std::set<std::string>& bound,
                    const std::function<bool(const ReplKey&, Sort)>& wants,
                    std::vector<std::pair<ReplKey, Sort>>& out) {
  auto seen = [&](const ReplKey& k) {
    for (const auto& [key, s] : out)
      if (key == k) return true;
    return false;
  };
  std::function<void(const TermP&)> walkT = [&](const TermP& t) {
    if (!t) return;
    if (const auto* v = t->as<Term::Var>()) {
      if (v->role == VarRole::Logical || bound.count(v->name)) return;
      ReplKey k{false, v->owner, v->name};
      if (wants(k, v->sort) && !seen(k)) out.emplace_back(k, v->sort);
      return;
    }
    if (const auto* s = t->as<Term::Select>()) {
      ReplKey k{true, s->object, s->field};
      if (wants(k, Sort::Unknown) && !seen(k)) out.emplace_back(k, Sort::Unknown);
      walkT(s->heap);
      return;
    }
    if (const auto* s = t->as<Term::Store>()) {
      walkT(s->heap);
      walkT(s->value);
      return;
    }
    if (const auto* fn = t->as<Term::Fn>()) {
      for (const auto& a : fn->args) walkT(a);
    }
  };
  std::function<void(const FormulaP&)> walkF = [&](const FormulaP& g) {
    if (!g) return;
    if (const auto* n = g->as<Formula::Neg>()) return walkF(n->f);
    if (const auto* n = g->as<Formula::Or>()) { walkF(n->l); walkF(n->r); return; }
    if (const auto* n = g->as<Formula::And>()) { walkF(n->l); walkF(n->r); return; }
    if (const auto* n = g->as<Formula::Cmp>()) { walkT(n->l); walkT(n->r); return; }
    if (const auto* n = g->as<Formula::BoolAtom>()) { walkT(n->t); return; }
    if (const auto* n = g->as<Formula::Pred>()) {
      for (const auto& a : n->args) walkT(a);
      return;
    }
    if (const auto* n = g->as<Formula::Exists>()) {
      bool fresh = bound.insert(n->var).second;
      walkF(n->body);
      if (fresh) bound.erase(n->var);
      return;
    }
    if (const auto* n = g->as<Formula::Forall>()) {
      bool fresh = bound.insert(n->var).second;
      walkF(n->body);
      if (fresh) bound.erase(n->var);
      return;
    }
    if (const auto* n = g->as<Formula::Modal>()) return walkF(n->body);
  };
  walkF(f);
}

// Infers the sort of a symbol from the atoms it appears in.
Sort inferSort(const FormulaP& f, const ReplKey& key, Sort declared) {
  if (declared != Sort::Unknown) return declared;
  Sort found = Sort::Unknown;
  auto matches = [&](const TermP& t) {
    if (key.isField) {
      const auto* s = t ? t->as<Term::Select>() : nullptr;
      return s && s->object == key.owner && s->field == key.name;
    }
    const auto* v = t ? t->as<Term::Var>() : nullptr;
    return v && v->role != VarRole::Logical && v->name == key.name && v->owner == key.owner;
  };
  std::function<Sort(const TermP&)> sortOfTerm = [&](const TermP& t) -> Sort {
    if (!t) return Sort::Unknown;
    if (const auto* l = t->as<Term::Lit>()) return sortOfValue(l->v);
    if (const auto* v = t->as<Term::Var>()) return v->sort;
    if (t->as<Term::Result>()) return Sort::Unknown;
    if (t->as<Term::SelfRef>()) return Sort::Obj;
    if (const auto* fn = t->as<Term::Fn>()) {
      if (fn->op == "length") return Sort::Int;
      return Sort::Int;  // arithmetic
    }
    return Sort::Unknown;
  };
  std::function<void(const FormulaP&)> walkF = [&](const FormulaP& g) {
    if (!g || found != Sort::Unknown) return;
    if (const auto* n = g->as<Formula::Neg>()) return walkF(n->f);
    if (const auto* n = g->as<Formula::Or>()) { walkF(n->l); walkF(n->r); return; }
    if (const auto* n = g->as<Formula::And>()) { walkF(n->l); walkF(n->r); return; }
    if (const auto* n = g->as<Formula::Exists>()) return walkF(n->body);
    if (const auto* n = g->as<Formula::Forall>()) return walkF(n->body);
    if (const auto* n = g->as<Formula::Modal>()) return walkF(n->body);
    if (const auto* n = g->as<Formula::Cmp>()) {
      bool inL = matches(n->l), inR = matches(n->r);
      if (!inL && !inR) {
        // arithmetic containment: x appears inside a Fn on either side
        auto contains = [&](const TermP& t) {
          bool hit = false;
          std::function<void(const TermP&)> w = [&](const TermP& u) {
            if (hit || !u) return;
            if (matches(u)) { hit = true; return; }
            if (const auto* fn = u->as<Term::Fn>())
              for (const auto& a : fn->args) w(a);
          };
          w(t);
          return hit;
        };
        if (contains(n->l) || contains(n->r)) { found = Sort::Int; }
        return;
      }
      if (n->op != Formula::Cmp::Op::Eq) { found = Sort::Int; return; }
      Sort other = inL ? sortOfTerm(n->r) : sortOfTerm(n->l);
      if (other != Sort::Unknown) found = other;
      return;
    }
    if (const auto* n = g->as<Formula::BoolAtom>()) {
      if (matches(n->t)) found = Sort::Bool;
      return;
    }
  };
  walkF(f);
  return found == Sort::Unknown ? Sort::Int : found;
}

// Core engine shared by weaken / statePart / liftPost.
FormulaP weakenCore(const FormulaP& phi, const std::function<bool(const ReplKey&, Sort)>& replace,
                    bool quantifyResult) {
  std::set<std::string> bound;
  std::vector<std::pair<ReplKey, Sort>> repl;
  collectOrdered(phi, bound, replace, repl);

  std::set<std::string> taken = freeLogicalVars(phi);
  for (const auto& s : freeSymbols(phi)) taken.insert(s.name);

  FormulaP body = phi;
  std::vector<std::pair<std::string, Sort>> binders;
  for (const auto& [key, declaredSort] : repl) {
    Sort sort = inferSort(phi, key, declaredSort);
    std::string fresh = freshName(key.name, taken);
    taken.insert(fresh);
    TermP v = mkVar(fresh, sort, VarRole::Logical);
    if (key.isField) {
      body = substField(body, key.owner, key.name, v);
    } else {
      body = substVar(body, key.name, v);
    }
    binders.emplace_back(fresh, sort);
  }
  if (quantifyResult && mentionsResult(body)) {
    std::string fresh = freshName("r", taken);
    taken.insert(fresh);
    Sort s = Sort::Int;  // refined below if an atom says otherwise
    // result compared against booleans or used bare means Bool
    std::function<void(const FormulaP&)> scan = [&](const FormulaP& g) {
      if (!g) return;
      if (const auto* n = g->as<Formula::Neg>()) return scan(n->f);
      if (const auto* n = g->as<Formula::Or>()) { scan(n->l); scan(n->r); return; }
      if (const auto* n = g->as<Formula::And>()) { scan(n->l); scan(n->r); return; }
      if (const auto* n = g->as<Formula::Exists>()) return scan(n->body);
      if (const auto* n = g->as<Formula::Forall>()) return scan(n->body);
      if (const auto* n = g->as<Formula::BoolAtom>()) {
        if (n->t->as<Term::Result>()) s = Sort::Bool;
        return;
      }
      if (const auto* n = g->as<Formula::Cmp>()) {
        if (n->op == Formula::Cmp::Op::Eq) {
          auto other = [&](const TermP& x, const TermP& y) {
            if (x->as<Term::Result>()) {
              if (const auto* l = y->as<Term::Lit>()) s = sortOfValue(l->v);
            }
          };
          other(n->l, n->r);
          other(n->r, n->l);
        }
      }
    };
    scan(body);
    body = substResult(body, mkVar(fresh, s, VarRole::Logical));
    binders.emplace_back(fresh, s);
  }
  for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
    body = mkExists(it->second, it->first, body);
  }
  return body;
}

}  // namespace

FormulaP weaken(const FormulaP& phi, const std::string& X, const std::set<std::string>& extraKeep) {
  auto replace = [&](const ReplKey& k, Sort) {
    if (k.isField) return k.owner != X;
    if (extraKeep.count(k.name)) return false;
    // Variables with no recorded owner are ambient (Example 3 keeps the
    // method parameter i when weakening to another object).
    if (k.owner.empty()) return false;
    return k.owner != X;
  };
  return weakenCore(phi, replace, /*quantifyResult=*/false);
}

bool isObjectFormula(const FormulaP& phi, const std::string& X) {
  return alphaEqual(phi, weaken(phi, X));
}

FormulaP statePart(const FormulaP& phi, const std::string& X) {
  auto replace = [&](const ReplKey& k, Sort) {
    if (k.isField) return k.owner != X;
    return true;  // every process-local symbol dies with the process
  };
  return weakenCore(phi, replace, /*quantifyResult=*/true);
}

FormulaP liftPost(const FormulaP& phi, const std::string& X) {
  auto replace = [&](const ReplKey& k, Sort) {
    if (k.isField) return k.owner != X;
    return true;  // the resolver's locals are gone; result survives
  };
  return weakenCore(phi, replace, /*quantifyResult=*/false);
}

}  // namespace asyncst
