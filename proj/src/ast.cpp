#include "asyncst/ast.hpp"

#include <functional>

namespace asyncst {

std::string Type::str() const {
  switch (kind) {
    case K::Int: return "Int";
    case K::Bool: return "Bool";
    case K::Unit: return "Unit";
    case K::List: return "List<Int>";
    case K::Fut: return "Fut<" + (inner ? inner->str() : std::string("?")) + ">";
  }
  return "?";
}

namespace {
template <class N>
ExprP makeExpr(N n, SrcLoc loc) {
  return std::make_shared<Expr>(Expr{std::move(n), loc});
}
template <class N>
StmtP makeStmt(N n, SrcLoc loc) {
  return std::make_shared<Stmt>(Stmt{std::move(n), loc});
}
}  // namespace

ExprP mkExpr(Expr::Lit n, SrcLoc loc) { return makeExpr(std::move(n), loc); }
ExprP mkExpr(Expr::VarRef n, SrcLoc loc) { return makeExpr(std::move(n), loc); }
ExprP mkExpr(Expr::FieldRef n, SrcLoc loc) { return makeExpr(std::move(n), loc); }
ExprP mkExpr(Expr::Bin n, SrcLoc loc) { return makeExpr(std::move(n), loc); }
ExprP mkExpr(Expr::Not n, SrcLoc loc) { return makeExpr(std::move(n), loc); }
ExprP mkExpr(Expr::Length n, SrcLoc loc) { return makeExpr(std::move(n), loc); }

StmtP mkStmt(Stmt::Assign n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::Call n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::Get n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::Skip n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::If n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::While n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::Return n, SrcLoc loc) { return makeStmt(std::move(n), loc); }
StmtP mkStmt(Stmt::Seq n, SrcLoc loc) { return makeStmt(std::move(n), loc); }

std::vector<StmtP> seqToList(const StmtP& s) {
  // Fully flattens nested sequences (control-flow splicing can nest them
  // on the left).
  std::vector<StmtP> out;
  std::function<void(const StmtP&)> walk = [&](const StmtP& cur) {
    if (!cur) return;
    if (const auto* seq = cur->as<Stmt::Seq>()) {
      walk(seq->first);
      walk(seq->second);
      return;
    }
    out.push_back(cur);
  };
  walk(s);
  return out;
}

StmtP listToSeq(const std::vector<StmtP>& items, SrcLoc loc) {
  if (items.empty()) return mkStmt(Stmt::Skip{}, loc);
  StmtP acc = items.back();
  for (size_t i = items.size() - 1; i-- > 0;) {
    acc = mkStmt(Stmt::Seq{items[i], acc}, items[i]->loc);
  }
  return acc;
}

const MethodDecl* ObjectDecl::method(const std::string& m) const {
  for (const auto& md : methods)
    if (md.name == m) return &md;
  return nullptr;
}

const FieldDecl* ObjectDecl::field(const std::string& f) const {
  for (const auto& fd : fields)
    if (fd.name == f) return &fd;
  return nullptr;
}

const ObjectDecl* Program::object(const std::string& x) const {
  for (const auto& o : objects)
    if (o.name == x) return &o;
  return nullptr;
}

const MethodDecl* Program::method(const std::string& x, const std::string& m) const {
  const ObjectDecl* o = object(x);
  return o ? o->method(m) : nullptr;
}

}  // namespace asyncst
