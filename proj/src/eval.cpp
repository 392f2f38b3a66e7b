#include <algorithm>
#include <functional>

#include "asyncst/logic.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Expression evaluation (shared with the interpreter).
// ---------------------------------------------------------------------------
Value evalExpr(const ExprP& e, const std::map<std::string, Value>& locals,
               const std::map<std::string, Value>* heap) {
  struct V {
    const std::map<std::string, Value>& locals;
    const std::map<std::string, Value>* heap;
    Value operator()(const Expr::Lit& n) const { return n.v; }
    Value operator()(const Expr::VarRef& n) const {
      auto it = locals.find(n.name);
      if (it == locals.end()) throw EvalError("unbound variable '" + n.name + "'");
      return it->second;
    }
    Value operator()(const Expr::FieldRef& n) const {
      if (!heap) throw EvalError("no heap for field '" + n.name + "'");
      auto it = heap->find(n.name);
      if (it == heap->end()) throw EvalError("unbound field '" + n.name + "'");
      return it->second;
    }
    Value operator()(const Expr::Bin& n) const {
      Value l = evalExpr(n.l, locals, heap);
      Value r = evalExpr(n.r, locals, heap);
      const std::string& op = n.op;
      if (op == "==") return valueEq(l, r);
      if (op == "!=") return !valueEq(l, r);
      if (op == "&&" || op == "||") {
        const bool* a = std::get_if<bool>(&l);
        const bool* b = std::get_if<bool>(&r);
        if (!a || !b) throw EvalError("boolean operands expected for '" + op + "'");
        return op == "&&" ? (*a && *b) : (*a || *b);
      }
      const Int* a = std::get_if<Int>(&l);
      const Int* b = std::get_if<Int>(&r);
      if (!a || !b) throw EvalError("integer operands expected for '" + op + "'");
      if (op == "+") return *a + *b;
      if (op == "-") return *a - *b;
      if (op == "*") return *a * *b;
      if (op == "<") return *a < *b;
      if (op == "<=") return *a <= *b;
      if (op == ">") return *a > *b;
      if (op == ">=") return *a >= *b;
      throw EvalError("unknown operator '" + op + "'");
    }
    Value operator()(const Expr::Not& n) const {
      Value v = evalExpr(n.e, locals, heap);
      const bool* b = std::get_if<bool>(&v);
      if (!b) throw EvalError("boolean operand expected for '!'");
      return !*b;
    }
    Value operator()(const Expr::Length& n) const {
      Value v = evalExpr(n.e, locals, heap);
      const ListVal* l = std::get_if<ListVal>(&v);
      if (!l) throw EvalError("list operand expected for length");
      return (Int)l->elems.size();
    }
  };
  return std::visit(V{locals, heap}, e->node);
}

// ---------------------------------------------------------------------------
// Formula evaluation over configurations.
// ---------------------------------------------------------------------------
namespace {

struct Domains {
  std::vector<Value> ints;
  std::vector<Value> bools{true, false};
  std::vector<Value> futs;
  std::vector<Value> objs;
  std::vector<Value> lists;
};

void addInt(std::vector<Value>& v, Int n) {
  for (const auto& x : v)
    if (std::get<Int>(x) == n) return;
  v.push_back(n);
}

void addValue(Domains& d, const Value& v) {
  if (const Int* n = std::get_if<Int>(&v)) addInt(d.ints, *n);
  else if (const FutId* f = std::get_if<FutId>(&v)) {
    for (const auto& x : d.futs)
      if (std::get<FutId>(x) == *f) return;
    d.futs.push_back(*f);
  } else if (const ListVal* l = std::get_if<ListVal>(&v)) {
    for (const auto& x : d.lists)
      if (std::get<ListVal>(x) == *l) return;
    d.lists.push_back(*l);
  }
}

Domains buildDomains(const Configuration& cfg, const EvalFrame& frame) {
  Domains d;
  for (Int pad : {-1, 0, 1}) addInt(d.ints, pad);
  d.lists.push_back(ListVal{});           // Nil
  d.lists.push_back(ListVal{{0}});        // a non-nil witness
  for (const auto& o : cfg.objects) {
    d.objs.push_back(ObjRef{o.name});
    for (const auto& [k, v] : o.heap) addValue(d, v);
  }
  for (const auto& p : cfg.processes) {
    d.futs.push_back(p.fut);
    for (const auto& [k, v] : p.store) addValue(d, v);
    if (p.status == ProcessState::St::Done) addValue(d, p.retval);
  }
  if (frame.result) addValue(d, *frame.result);
  for (const auto& [k, v] : frame.extra) addValue(d, v);
  return d;
}

struct Env {
  const Configuration& cfg;
  const EvalFrame& frame;
  const Domains& dom;
  std::map<std::string, Value> bound;

  Value term(const TermP& t0) const {
    TermP t = simplifyTerm(t0);
    if (const auto* v = t->as<Term::Var>()) {
      auto it = bound.find(v->name);
      if (it != bound.end()) return it->second;
      auto ex = frame.extra.find(v->name);
      if (ex != frame.extra.end()) return ex->second;
      if (frame.proc) {
        auto st = frame.proc->store.find(v->name);
        if (st != frame.proc->store.end()) return st->second;
      }
      throw EvalError("unresolvable symbol '" + v->name + "'");
    }
    if (const auto* l = t->as<Term::Lit>()) return l->v;
    if (const auto* s = t->as<Term::Select>()) {
      if (!s->heap->as<Term::HeapSym>()) throw EvalError("unreduced store term");
      std::string obj = s->object == "self" ? frame.selfObject : s->object;
      const ObjectState* o = cfg.object(obj);
      if (!o) throw EvalError("unknown object '" + obj + "'");
      auto it = o->heap.find(s->field);
      if (it == o->heap.end())
        throw EvalError("unknown field '" + obj + "." + s->field + "'");
      return it->second;
    }
    if (t->as<Term::Result>()) {
      if (!frame.result) throw EvalError("result is not bound here");
      return *frame.result;
    }
    if (t->as<Term::SelfRef>()) {
      if (frame.selfObject.empty()) throw EvalError("self is not bound here");
      return ObjRef{frame.selfObject};
    }
    if (const auto* fn = t->as<Term::Fn>()) {
      if (fn->op == "length") {
        Value v = term(fn->args[0]);
        const ListVal* l = std::get_if<ListVal>(&v);
        if (!l) throw EvalError("length of a non-list");
        return (Int)l->elems.size();
      }
      Value a = term(fn->args[0]);
      Value b = term(fn->args[1]);
      const Int* x = std::get_if<Int>(&a);
      const Int* y = std::get_if<Int>(&b);
      if (!x || !y) throw EvalError("integer operands expected for '" + fn->op + "'");
      if (fn->op == "+") return *x + *y;
      if (fn->op == "-") return *x - *y;
      if (fn->op == "*") return *x * *y;
      throw EvalError("unknown function '" + fn->op + "'");
    }
    throw EvalError("unevaluable term");
  }

  const std::vector<Value>& domainFor(Sort s) const {
    switch (s) {
      case Sort::Int: return dom.ints;
      case Sort::Bool: return dom.bools;
      case Sort::Fut: return dom.futs;
      case Sort::Obj: return dom.objs;
      case Sort::List: return dom.lists;
      default: return dom.ints;
    }
  }

  bool eval(const FormulaP& f) {
    if (f->as<Formula::Top>()) return true;
    if (const auto* n = f->as<Formula::Neg>()) return !eval(n->f);
    if (const auto* n = f->as<Formula::Or>()) return eval(n->l) || eval(n->r);
    if (const auto* n = f->as<Formula::And>()) return eval(n->l) && eval(n->r);
    if (const auto* n = f->as<Formula::Cmp>()) {
      Value l = term(n->l), r = term(n->r);
      if (n->op == Formula::Cmp::Op::Eq) return valueEq(l, r);
      const Int* a = std::get_if<Int>(&l);
      const Int* b = std::get_if<Int>(&r);
      if (!a || !b) throw EvalError("integer comparison on non-integers");
      return n->op == Formula::Cmp::Op::Geq ? *a >= *b : *a > *b;
    }
    if (const auto* n = f->as<Formula::BoolAtom>()) {
      Value v = term(n->t);
      const bool* b = std::get_if<bool>(&v);
      if (!b) throw EvalError("boolean atom on a non-boolean");
      return *b;
    }
    if (f->as<Formula::Pred>()) throw EvalError("uninterpreted predicate");
    if (const auto* n = f->as<Formula::Exists>()) {
      for (const Value& v : domainFor(n->sort)) {
        auto saved = bound;
        bound[n->var] = v;
        bool ok = eval(n->body);
        bound = saved;
        if (ok) return true;
      }
      return false;
    }
    if (const auto* n = f->as<Formula::Forall>()) {
      for (const Value& v : domainFor(n->sort)) {
        auto saved = bound;
        bound[n->var] = v;
        bool ok = eval(n->body);
        bound = saved;
        if (!ok) return false;
      }
      return true;
    }
    throw EvalError("modalities cannot be evaluated against a configuration");
  }
};

}  // namespace

bool evalFormula(const FormulaP& phi, const Configuration& cfg, const EvalFrame& frame) {
  Domains dom = buildDomains(cfg, frame);
  Env env{cfg, frame, dom, {}};
  return env.eval(simplify(phi));
}

}  // namespace asyncst
