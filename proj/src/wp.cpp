#include <functional>

#include "asyncst/logic.hpp"

namespace asyncst {

TermP exprToTerm(const ExprP& e, const std::string& selfObject) {
  struct V {
    const std::string& self;
    TermP operator()(const Expr::Lit& n) const { return mkLit(n.v); }
    TermP operator()(const Expr::VarRef& n) const {
      return mkVar(n.name, Sort::Unknown, VarRole::CalleeParam, self);
    }
    TermP operator()(const Expr::FieldRef& n) const { return mkField(self, n.name); }
    TermP operator()(const Expr::Bin& n) const {
      if (n.op == "+" || n.op == "-" || n.op == "*")
        return mkFn(n.op, {exprToTerm(n.l, self), exprToTerm(n.r, self)});
      throw InternalError("expression is not a term: operator " + n.op);
    }
    TermP operator()(const Expr::Not&) const {
      throw InternalError("expression is not a term: negation");
    }
    TermP operator()(const Expr::Length& n) const {
      return mkFn("length", {exprToTerm(n.e, self)});
    }
  };
  return std::visit(V{selfObject}, e->node);
}

FormulaP exprToFormula(const ExprP& e, const std::string& selfObject) {
  if (const auto* b = e->as<Expr::Bin>()) {
    const std::string& op = b->op;
    if (op == "&&") return mkAnd(exprToFormula(b->l, selfObject), exprToFormula(b->r, selfObject));
    if (op == "||") return mkOr(exprToFormula(b->l, selfObject), exprToFormula(b->r, selfObject));
    auto cmp = [&](Formula::Cmp::Op o, bool flip, bool neg) {
      TermP l = exprToTerm(b->l, selfObject);
      TermP r = exprToTerm(b->r, selfObject);
      FormulaP f = flip ? mkCmp(o, r, l) : mkCmp(o, l, r);
      return neg ? mkNeg(f) : f;
    };
    if (op == "==") return cmp(Formula::Cmp::Op::Eq, false, false);
    if (op == "!=") return cmp(Formula::Cmp::Op::Eq, false, true);
    if (op == ">") return cmp(Formula::Cmp::Op::Gt, false, false);
    if (op == ">=") return cmp(Formula::Cmp::Op::Geq, false, false);
    if (op == "<") return cmp(Formula::Cmp::Op::Gt, true, false);
    if (op == "<=") return cmp(Formula::Cmp::Op::Geq, true, false);
  }
  if (const auto* n = e->as<Expr::Not>()) return mkNeg(exprToFormula(n->e, selfObject));
  if (const auto* l = e->as<Expr::Lit>()) {
    if (const bool* b = std::get_if<bool>(&l->v)) return *b ? mkTop() : mkBot();
  }
  // Boolean variable or field used as a guard.
  return mkBoolAtom(exprToTerm(e, selfObject));
}

FormulaP PostFacts::factsForGet(const Stmt::Get& g) const {
  if (!resolveGet) return mkTop();
  std::vector<FormulaP> alternatives;
  for (const auto& [obj, method] : resolveGet(g)) {
    auto it = postOf.find({obj, method});
    FormulaP post = it != postOf.end() ? it->second : mkTop();
    alternatives.push_back(liftPost(post, obj));
  }
  if (alternatives.empty()) return mkTop();
  FormulaP acc = alternatives[0];
  for (size_t i = 1; i < alternatives.size(); ++i) acc = mkOr(acc, alternatives[i]);
  return acc;
}

namespace {

// heap := store(heap, object, field, value) applied to every ambient heap
// occurrence of the formula.
TermP wrapHeapT(const TermP& t, const std::string& object, const std::string& field,
                const TermP& value);

FormulaP wrapHeap(const FormulaP& f, const std::string& object, const std::string& field,
                  const TermP& value) {
  struct V {
    const std::string& object;
    const std::string& field;
    const TermP& value;
    FormulaP operator()(const Formula::Top&) const { return mkTop(); }
    FormulaP operator()(const Formula::Neg& n) const {
      return mkNeg(wrapHeap(n.f, object, field, value));
    }
    FormulaP operator()(const Formula::Or& n) const {
      return mkOr(wrapHeap(n.l, object, field, value), wrapHeap(n.r, object, field, value));
    }
    FormulaP operator()(const Formula::And& n) const {
      return mkAnd(wrapHeap(n.l, object, field, value), wrapHeap(n.r, object, field, value));
    }
    FormulaP operator()(const Formula::Cmp& n) const {
      return mkCmp(n.op, wrapHeapT(n.l, object, field, value),
                   wrapHeapT(n.r, object, field, value));
    }
    FormulaP operator()(const Formula::BoolAtom& n) const {
      return mkBoolAtom(wrapHeapT(n.t, object, field, value));
    }
    FormulaP operator()(const Formula::Pred& n) const {
      std::vector<TermP> args;
      for (const auto& a : n.args) args.push_back(wrapHeapT(a, object, field, value));
      return mkPred(n.name, std::move(args));
    }
    FormulaP operator()(const Formula::Exists& n) const {
      return mkExists(n.sort, n.var, wrapHeap(n.body, object, field, value));
    }
    FormulaP operator()(const Formula::Forall& n) const {
      return mkForall(n.sort, n.var, wrapHeap(n.body, object, field, value));
    }
    FormulaP operator()(const Formula::Modal& n) const {
      throw InternalError("modality inside wp target");
    }
  };
  return std::visit(V{object, field, value}, f->node);
}

TermP wrapHeapT(const TermP& t, const std::string& object, const std::string& field,
                const TermP& value) {
  if (!t) return t;
  if (t->as<Term::HeapSym>()) return mkStore(mkHeap(), object, field, value);
  if (const auto* s = t->as<Term::Select>())
    return mkSelect(wrapHeapT(s->heap, object, field, value), s->object, s->field);
  if (const auto* s = t->as<Term::Store>())
    return mkStore(wrapHeapT(s->heap, object, field, value), s->object, s->field,
                   wrapHeapT(s->value, object, field, value));
  if (const auto* fn = t->as<Term::Fn>()) {
    std::vector<TermP> args;
    for (const auto& a : fn->args) args.push_back(wrapHeapT(a, object, field, value));
    return mkFn(fn->op, std::move(args));
  }
  return t;
}

// Fresh havoc variable for a target, with freshness constraints against the
// future symbols remaining in the formula (rule call's "C does not contain f'").
FormulaP havocFut(const FormulaP& phi, const std::string& target) {
  std::set<std::string> taken = freeLogicalVars(phi);
  for (const auto& s : freeSymbols(phi)) taken.insert(s.name);
  std::string v = freshName("fv", taken);
  FormulaP substituted = substVar(phi, target, mkVar(v, Sort::Fut, VarRole::Logical));
  std::vector<FormulaP> distinct;
  for (const auto& s : freeSymbols(substituted)) {
    if (s.kind == SymbolInfo::K::Var && s.sort == Sort::Fut && s.name != target)
      distinct.push_back(mkNeg(mkEq(mkVar(v, Sort::Fut, VarRole::Logical),
                                    mkVar(s.name, Sort::Fut, s.role, s.owner))));
  }
  FormulaP guard = conjoin(distinct);
  FormulaP body = isTop(guard) ? substituted
                               : mkOr(mkNeg(guard), substituted);  // guard -> substituted
  return mkForall(Sort::Fut, v, body);
}

FormulaP havocWithFacts(const FormulaP& phi, const std::string& target, Sort sort,
                        const FormulaP& facts) {
  std::set<std::string> taken = freeLogicalVars(phi);
  for (const auto& s : freeSymbols(phi)) taken.insert(s.name);
  for (const auto& s : freeSymbols(facts)) taken.insert(s.name);
  for (const auto& s : freeLogicalVars(facts)) taken.insert(s);
  std::string v = freshName("gv", taken);
  TermP vt = mkVar(v, sort, VarRole::Logical);
  FormulaP substituted = substVar(phi, target, vt);
  FormulaP instFacts = substResult(facts, vt);
  FormulaP body = isTop(instFacts) ? substituted : mkOr(mkNeg(instFacts), substituted);
  return mkForall(sort, v, body);
}

FormulaP wpStmt(const StmtP& s, FormulaP post, const PostFacts& ctx, const std::string& self);

FormulaP wpList(const std::vector<StmtP>& list, size_t upto, FormulaP post, const PostFacts& ctx,
                const std::string& self) {
  FormulaP acc = std::move(post);
  for (size_t i = upto; i-- > 0;) acc = wpStmt(list[i], acc, ctx, self);
  return acc;
}

FormulaP wpStmt(const StmtP& s, FormulaP post, const PostFacts& ctx, const std::string& self) {
  if (s->as<Stmt::Skip>()) return post;
  if (s->as<Stmt::Seq>()) {
    auto list = seqToList(s);
    return wpList(list, list.size(), std::move(post), ctx, self);
  }
  if (const auto* a = s->as<Stmt::Assign>()) {
    TermP val = exprToTerm(a->expr, self);
    if (a->fieldTarget) return simplify(wrapHeap(post, self, a->target, val));
    return substVar(post, a->target, val);
  }
  if (const auto* r = s->as<Stmt::Return>()) {
    return substResult(post, exprToTerm(r->expr, self));
  }
  if (const auto* c = s->as<Stmt::Call>()) {
    if (!c->target) return post;  // fire-and-forget leaves the caller state unchanged
    if (c->fieldTarget) {
      // Future stored into a field: havoc via a quantified value.
      std::set<std::string> taken = freeLogicalVars(post);
      std::string v = freshName("fv", taken);
      FormulaP wrapped = wrapHeap(post, self, *c->target, mkVar(v, Sort::Fut, VarRole::Logical));
      return mkForall(Sort::Fut, v, simplify(wrapped));
    }
    return havocFut(post, *c->target);
  }
  if (const auto* g = s->as<Stmt::Get>()) {
    FormulaP facts = ctx.factsForGet(*g);
    Sort sort = Sort::Int;
    auto it = ctx.localSorts.find(g->target);
    if (it != ctx.localSorts.end()) sort = it->second;
    if (g->fieldTarget) {
      std::set<std::string> taken = freeLogicalVars(post);
      std::string v = freshName("gv", taken);
      TermP vt = mkVar(v, sort, VarRole::Logical);
      FormulaP wrapped = simplify(wrapHeap(post, self, g->target, vt));
      FormulaP instFacts = substResult(facts, vt);
      FormulaP body = isTop(instFacts) ? wrapped : mkOr(mkNeg(instFacts), wrapped);
      return mkForall(sort, v, body);
    }
    return havocWithFacts(post, g->target, sort, facts);
  }
  if (const auto* i = s->as<Stmt::If>()) {
    FormulaP g = exprToFormula(i->guard, self);
    FormulaP wt = wpStmt(i->thenS, post, ctx, self);
    FormulaP we = wpStmt(i->elseS, post, ctx, self);
    return mkAnd(mkOr(mkNeg(g), wt), mkOr(g, we));
  }
  throw InternalError("wp: loop inside a straight-line history");
}

}  // namespace

FormulaP wp(const StmtP& history, const FormulaP& post, const PostFacts& ctx,
            const std::string& selfObject) {
  if (containsModal(post)) throw InternalError("wp target must be modality-free");
  return simplify(wpStmt(history, post, ctx, selfObject));
}

}  // namespace asyncst
