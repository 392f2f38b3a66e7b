#ifndef ASYNCST_AST_HPP_
#define ASYNCST_AST_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "asyncst/base.hpp"
#include "asyncst/value.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Declared types: Int, Bool, Unit, List<Int>, Fut<T>.
// ---------------------------------------------------------------------------
struct Type {
  enum class K { Int, Bool, Unit, List, Fut } kind = K::Int;
  std::shared_ptr<const Type> inner;  // for Fut<T>

  bool isFut() const { return kind == K::Fut; }
  bool operator==(const Type& o) const {
    if (kind != o.kind) return false;
    if (kind != K::Fut) return true;
    if (!inner || !o.inner) return !inner && !o.inner;
    return *inner == *o.inner;
  }
  static Type intT() { return {K::Int, nullptr}; }
  static Type boolT() { return {K::Bool, nullptr}; }
  static Type unitT() { return {K::Unit, nullptr}; }
  static Type listT() { return {K::List, nullptr}; }
  static Type futT(Type t) { return {K::Fut, std::make_shared<Type>(std::move(t))}; }
  Sort sort() const {
    switch (kind) {
      case K::Int: return Sort::Int;
      case K::Bool: return Sort::Bool;
      case K::Unit: return Sort::UnitS;
      case K::List: return Sort::List;
      case K::Fut: return Sort::Fut;
    }
    return Sort::Unknown;
  }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Expressions.
// ---------------------------------------------------------------------------
struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  struct Lit { Value v; };
  struct VarRef { std::string name; };
  struct FieldRef { std::string name; };  // this.name
  struct Bin { std::string op; ExprP l, r; };  // + - * == != < <= > >= && ||
  struct Not { ExprP e; };
  struct Length { ExprP e; };

  std::variant<Lit, VarRef, FieldRef, Bin, Not, Length> node;
  SrcLoc loc;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

ExprP mkExpr(Expr::Lit n, SrcLoc loc = {});
ExprP mkExpr(Expr::VarRef n, SrcLoc loc = {});
ExprP mkExpr(Expr::FieldRef n, SrcLoc loc = {});
ExprP mkExpr(Expr::Bin n, SrcLoc loc = {});
ExprP mkExpr(Expr::Not n, SrcLoc loc = {});
ExprP mkExpr(Expr::Length n, SrcLoc loc = {});

// ---------------------------------------------------------------------------
// Statements. Seq is right-associated after parsing.
// ---------------------------------------------------------------------------
struct Stmt;
using StmtP = std::shared_ptr<const Stmt>;

struct Stmt {
  // [T] x = e  /  this.f = e
  struct Assign {
    std::optional<Type> declType;
    bool fieldTarget;
    std::string target;
    ExprP expr;
  };
  // [[Fut<T>] x =] X!m(args)
  struct Call {
    std::optional<Type> declType;
    std::optional<std::string> target;  // absent for fire-and-forget
    bool fieldTarget;
    std::string callee;
    std::string method;
    std::vector<ExprP> args;
  };
  // [T] x = e.get
  struct Get {
    std::optional<Type> declType;
    bool fieldTarget;
    std::string target;
    ExprP fut;
  };
  struct Skip {};
  struct If { ExprP guard; StmtP thenS, elseS; };
  struct While { ExprP guard; StmtP body; };
  struct Return { ExprP expr; };
  struct Seq { StmtP first, second; };

  std::variant<Assign, Call, Get, Skip, If, While, Return, Seq> node;
  SrcLoc loc;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

StmtP mkStmt(Stmt::Assign n, SrcLoc loc = {});
StmtP mkStmt(Stmt::Call n, SrcLoc loc = {});
StmtP mkStmt(Stmt::Get n, SrcLoc loc = {});
StmtP mkStmt(Stmt::Skip n, SrcLoc loc = {});
StmtP mkStmt(Stmt::If n, SrcLoc loc = {});
StmtP mkStmt(Stmt::While n, SrcLoc loc = {});
StmtP mkStmt(Stmt::Return n, SrcLoc loc = {});
StmtP mkStmt(Stmt::Seq n, SrcLoc loc = {});

// Flattens a right-associated Seq into a list (no Seq nodes in the result).
std::vector<StmtP> seqToList(const StmtP& s);
StmtP listToSeq(const std::vector<StmtP>& items, SrcLoc loc = {});

// ---------------------------------------------------------------------------
// Declarations.
// ---------------------------------------------------------------------------
struct FieldDecl {
  Type type;
  std::string name;
  ExprP init;
  SrcLoc loc;
};

struct MethodDecl {
  Type retType;
  std::string name;
  std::vector<std::pair<Type, std::string>> params;
  StmtP body;  // includes the final Return
  SrcLoc loc;
};

struct ObjectDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  SrcLoc loc;

  const MethodDecl* method(const std::string& m) const;
  const FieldDecl* field(const std::string& f) const;
};

struct Program {
  std::vector<ObjectDecl> objects;
  std::string mainCallee;
  std::string mainMethod;
  std::vector<ExprP> mainArgs;
  SrcLoc mainLoc;

  const ObjectDecl* object(const std::string& x) const;
  const MethodDecl* method(const std::string& x, const std::string& m) const;
};

// Location kind used by Points-To and the type checker.
struct Location {
  enum class K { Local, Field } kind = K::Local;
  std::string owner;   // object name; for locals, the owning object
  std::string method;  // for locals, the owning method ("" for fields)
  std::string name;
  bool operator==(const Location&) const = default;
  auto operator<=>(const Location&) const = default;
};

}  // namespace asyncst

#endif  // ASYNCST_AST_HPP_
