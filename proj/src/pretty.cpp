#include "asyncst/pretty.hpp"

#include <sstream>

namespace asyncst {

namespace {

std::string ind(int n) { return std::string(n * 2, ' '); }

// Term precedence: 0 = additive, 1 = multiplicative, 2 = primary.
std::string termPrec(const TermP& t, const std::string& selfObj, int prec);

std::string termPrimary(const TermP& t, const std::string& selfObj) {
  if (const auto* v = t->as<Term::Var>()) return v->name;
  if (const auto* l = t->as<Term::Lit>()) return valueToString(l->v);
  if (t->as<Term::HeapSym>()) return "heap";
  if (const auto* s = t->as<Term::Select>()) {
    if (s->heap && s->heap->as<Term::HeapSym>()) {
      if (!selfObj.empty() && s->object == selfObj) return "self." + s->field;
      return s->object + "." + s->field;
    }
    return "select(" + termPrec(s->heap, selfObj, 0) + ", " + s->object + ", " + s->field + ")";
  }
  if (const auto* s = t->as<Term::Store>()) {
    return "store(" + termPrec(s->heap, selfObj, 0) + ", " + s->object + ", " + s->field +
           ", " + termPrec(s->value, selfObj, 0) + ")";
  }
  if (t->as<Term::Result>()) return "result";
  if (t->as<Term::SelfRef>()) return "self";
  if (const auto* f = t->as<Term::Fn>()) {
    if (f->op == "length") return "length(" + termPrec(f->args[0], selfObj, 0) + ")";
    return "";  // binary ops handled below
  }
  return "?";
}

std::string termPrec(const TermP& t, const std::string& selfObj, int prec) {
  if (const auto* f = t->as<Term::Fn>()) {
    if (f->op == "+" || f->op == "-") {
      std::string s = termPrec(f->args[0], selfObj, 0) + " " + f->op + " " +
                      termPrec(f->args[1], selfObj, 1);
      // No parenthesized terms in the grammar: additive under multiplicative
      // cannot be printed; flattening keeps corpus formulas linear.
      return s;
    }
    if (f->op == "*") {
      return termPrec(f->args[0], selfObj, 1) + " * " + termPrec(f->args[1], selfObj, 2);
    }
  }
  return termPrimary(t, selfObj);
}

// Formula precedence: 0 = or, 1 = and, 2 = unary/atom.
std::string formulaPrec(const FormulaP& f, const std::string& selfObj, int prec) {
  struct V {
    const std::string& selfObj;
    int prec;
    std::string operator()(const Formula::Top&) const { return "top"; }
    std::string operator()(const Formula::Neg& n) const {
      // != sugar for negated equalities keeps protocol files readable.
      if (const auto* c = n.f->as<Formula::Cmp>()) {
        if (c->op == Formula::Cmp::Op::Eq) {
          return termPrec(c->l, selfObj, 0) + " != " + termPrec(c->r, selfObj, 0);
        }
      }
      return "!" + formulaPrec(n.f, selfObj, 2);
    }
    std::string operator()(const Formula::Or& n) const {
      std::string s = formulaPrec(n.l, selfObj, 0) + " || " + formulaPrec(n.r, selfObj, 1);
      return prec > 0 ? "(" + s + ")" : s;
    }
    std::string operator()(const Formula::And& n) const {
      std::string s = formulaPrec(n.l, selfObj, 1) + " && " + formulaPrec(n.r, selfObj, 2);
      return prec > 1 ? "(" + s + ")" : s;
    }
    std::string operator()(const Formula::Cmp& n) const {
      const char* op = n.op == Formula::Cmp::Op::Eq ? "=="
                       : n.op == Formula::Cmp::Op::Geq ? ">="
                                                       : ">";
      std::string s = termPrec(n.l, selfObj, 0) + " " + op + " " + termPrec(n.r, selfObj, 0);
      return s;
    }
    std::string operator()(const Formula::BoolAtom& n) const {
      return termPrec(n.t, selfObj, 0);
    }
    std::string operator()(const Formula::Pred& n) const {
      std::string s = n.name + "(";
      for (size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += termPrec(n.args[i], selfObj, 0);
      }
      return s + ")";
    }
    std::string operator()(const Formula::Exists& n) const {
      std::string s = "exists " + sortName(n.sort) + " " + n.var + ". " +
                      formulaPrec(n.body, selfObj, 0);
      return prec > 0 ? "(" + s + ")" : s;
    }
    std::string operator()(const Formula::Forall& n) const {
      std::string s = "forall " + sortName(n.sort) + " " + n.var + ". " +
                      formulaPrec(n.body, selfObj, 0);
      return prec > 0 ? "(" + s + ")" : s;
    }
    std::string operator()(const Formula::Modal& n) const {
      return "[" + prettyStmt(n.stmt) + "] " + formulaPrec(n.body, selfObj, 2);
    }
  };
  return std::visit(V{selfObj, prec}, f->node);
}

}  // namespace

std::string prettyTerm(const TermP& t, const std::string& selfObject) {
  return termPrec(t, selfObject, 0);
}

std::string prettyFormula(const FormulaP& f, const std::string& selfObject) {
  return formulaPrec(f, selfObject, 0);
}

// ---------------------------------------------------------------------------
// Expressions / statements / programs.
// ---------------------------------------------------------------------------
namespace {

int exprPrecOf(const std::string& op) {
  if (op == "||") return 0;
  if (op == "&&") return 1;
  if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") return 3;
  if (op == "+" || op == "-") return 4;
  if (op == "*") return 5;
  return 6;
}

std::string exprPrec(const ExprP& e, int prec) {
  struct V {
    int prec;
    std::string operator()(const Expr::Lit& n) const { return valueToString(n.v); }
    std::string operator()(const Expr::VarRef& n) const { return n.name; }
    std::string operator()(const Expr::FieldRef& n) const { return "this." + n.name; }
    std::string operator()(const Expr::Bin& n) const {
      int p = exprPrecOf(n.op);
      std::string s = exprPrec(n.l, p) + " " + n.op + " " + exprPrec(n.r, p + 1);
      return p < prec ? "(" + s + ")" : s;
    }
    std::string operator()(const Expr::Not& n) const { return "!" + exprPrec(n.e, 6); }
    std::string operator()(const Expr::Length& n) const {
      return "length(" + exprPrec(n.e, 0) + ")";
    }
  };
  return std::visit(V{prec}, e->node);
}

}  // namespace

std::string prettyExpr(const ExprP& e) { return exprPrec(e, 0); }

std::string prettyStmt(const StmtP& s, int indent) {
  struct V {
    int indent;
    std::string operator()(const Stmt::Assign& n) const {
      std::string s = ind(indent);
      if (n.declType) s += n.declType->str() + " ";
      if (n.fieldTarget) s += "this.";
      s += n.target + " = " + prettyExpr(n.expr) + ";";
      return s;
    }
    std::string operator()(const Stmt::Call& n) const {
      std::string s = ind(indent);
      if (n.target) {
        if (n.declType) s += n.declType->str() + " ";
        if (n.fieldTarget) s += "this.";
        s += *n.target + " = ";
      }
      s += n.callee + "!" + n.method + "(";
      for (size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += prettyExpr(n.args[i]);
      }
      return s + ");";
    }
    std::string operator()(const Stmt::Get& n) const {
      std::string s = ind(indent);
      if (n.declType) s += n.declType->str() + " ";
      if (n.fieldTarget) s += "this.";
      s += n.target + " = " + prettyExpr(n.fut) + ".get;";
      return s;
    }
    std::string operator()(const Stmt::Skip&) const { return ind(indent) + "skip;"; }
    std::string operator()(const Stmt::If& n) const {
      std::string s = ind(indent) + "if (" + prettyExpr(n.guard) + ") {\n" +
                      prettyStmt(n.thenS, indent + 1) + "\n" + ind(indent) + "}";
      if (!n.elseS->as<Stmt::Skip>()) {
        s += " else {\n" + prettyStmt(n.elseS, indent + 1) + "\n" + ind(indent) + "}";
      }
      return s;
    }
    std::string operator()(const Stmt::While& n) const {
      return ind(indent) + "while (" + prettyExpr(n.guard) + ") {\n" +
             prettyStmt(n.body, indent + 1) + "\n" + ind(indent) + "}";
    }
    std::string operator()(const Stmt::Return& n) const {
      return ind(indent) + "return " + prettyExpr(n.expr) + ";";
    }
    std::string operator()(const Stmt::Seq& n) const {
      return prettyStmt(n.first, indent) + "\n" + prettyStmt(n.second, indent);
    }
  };
  return std::visit(V{indent}, s->node);
}

std::string prettyProgram(const Program& p) {
  std::ostringstream os;
  for (const auto& o : p.objects) {
    os << "object " << o.name << " {\n";
    for (const auto& f : o.fields)
      os << ind(1) << f.type.str() << " " << f.name << " = " << prettyExpr(f.init) << ";\n";
    for (const auto& m : o.methods) {
      os << ind(1) << m.retType.str() << " " << m.name << "(";
      for (size_t i = 0; i < m.params.size(); ++i) {
        if (i) os << ", ";
        os << m.params[i].first.str() << " " << m.params[i].second;
      }
      os << ") {\n" << prettyStmt(m.body, 2) << "\n" << ind(1) << "}\n";
    }
    os << "}\n\n";
  }
  os << "main { " << p.mainCallee << "!" << p.mainMethod << "(";
  for (size_t i = 0; i < p.mainArgs.size(); ++i) {
    if (i) os << ", ";
    os << prettyExpr(p.mainArgs[i]);
  }
  os << "); }\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Protocol and local types.
// ---------------------------------------------------------------------------
namespace {

std::string paramList(const std::vector<std::string>& params) {
  if (params.empty()) return "";
  std::string s = "(";
  for (size_t i = 0; i < params.size(); ++i) {
    if (i) s += ", ";
    s += params[i];
  }
  return s + ")";
}

void printGBody(std::ostringstream& os, const GBody& items, int indent);

void printGItem(std::ostringstream& os, const GItemP& it, int indent) {
  if (const auto* c = it->as<GItem::Call>()) {
    os << ind(indent) << c->caller;
    if (c->loc) os << " -[" << *c->loc << "]-> ";
    else os << " -> ";
    os << c->callee << "." << c->method << paramList(c->params) << " {";
    bool needPre = !isTop(c->pre);
    if (needPre) os << " pre: " << prettyFormula(c->pre) << ",";
    os << " post: " << prettyFormula(c->post) << " }\n";
  } else if (const auto* r = it->as<GItem::Read>()) {
    os << ind(indent) << r->object << " reads " << prettyTerm(r->locExpr) << "\n";
  } else if (const auto* rp = it->as<GItem::Repeat>()) {
    os << ind(indent) << "repeat {\n";
    printGBody(os, rp->body, indent + 1);
    os << ind(indent) << "} invariant " << prettyFormula(rp->invariant) << "\n";
  } else if (const auto* ch = it->as<GItem::Choice>()) {
    os << ind(indent) << "choice " << ch->chooser << " {\n";
    for (const auto& br : ch->branches) {
      os << ind(indent + 1) << "branch { post: " << prettyFormula(br.post);
      if (!br.reacts.empty()) {
        os << ", reacts: [";
        for (size_t i = 0; i < br.reacts.size(); ++i) {
          if (i) os << ", ";
          os << br.reacts[i].first << " { post: " << prettyFormula(br.reacts[i].second) << " }";
        }
        os << "]";
      }
      os << " } => {\n";
      printGBody(os, br.body, indent + 2);
      os << ind(indent + 1) << "}\n";
    }
    os << ind(indent) << "}\n";
  } else if (it->as<GItem::End>()) {
    os << ind(indent) << "end\n";
  }
}

void printGBody(std::ostringstream& os, const GBody& items, int indent) {
  for (const auto& it : items) printGItem(os, it, indent);
}

std::string lItemStr(const LItemP& it, const std::string& self) {
  if (const auto* r = it->as<LItem::Receive>())
    return r->method + "?<" + prettyFormula(r->pre, self) + ">";
  if (const auto* s = it->as<LItem::Send>()) {
    std::string out = s->callee + "!" + s->method;
    if (s->loc) out += "[" + *s->loc + "]";
    return out + "<" + prettyFormula(s->pre, self) + ">";
  }
  if (const auto* p = it->as<LItem::Put>())
    return "Put<" + prettyFormula(p->post, self) + ">";
  if (const auto* r = it->as<LItem::Read>())
    return "Read<" + prettyTerm(r->locExpr, self) + ">";
  if (it->as<LItem::SkipI>()) return "skip";
  if (const auto* rp = it->as<LItem::Repeat>())
    return "(" + prettyLBody(rp->body, self) + ")*<" + prettyFormula(rp->invariant, self) + ">";
  if (const auto* sel = it->as<LItem::Select>()) {
    std::string out = "+{ ";
    for (size_t i = 0; i < sel->branches.size(); ++i) {
      if (i) out += " | ";
      out += prettyLBody(sel->branches[i], self);
    }
    return out + " }";
  }
  if (const auto* off = it->as<LItem::Offer>()) {
    std::string out = "&{ ";
    for (size_t i = 0; i < off->branches.size(); ++i) {
      if (i) out += " | ";
      out += off->srcObject + "." + off->srcMethod + "<" +
             prettyFormula(off->branches[i].guard, self) + ">; " +
             prettyLBody(off->branches[i].body, self);
    }
    return out + " }";
  }
  if (it->as<LItem::End>()) return "end";
  return "?";
}

}  // namespace

std::string prettyLBody(const LBody& body, const std::string& selfObject) {
  std::string out;
  for (size_t i = 0; i < body.size(); ++i) {
    if (i) out += ". ";
    out += lItemStr(body[i], selfObject);
  }
  return out;
}

std::string prettyLocal(const LocalType& t) { return prettyLBody(t.items, t.object); }

std::string prettyGlobal(const GlobalType& g) {
  std::ostringstream os;
  os << "main -> " << g.head.callee << "." << g.head.method << paramList(g.head.params)
     << " { post: " << prettyFormula(g.head.post) << " }\n";
  printGBody(os, g.body, 0);
  return os.str();
}

}  // namespace asyncst
