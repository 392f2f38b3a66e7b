#ifndef ASYNCST_PRETTY_HPP_
#define ASYNCST_PRETTY_HPP_

#include <string>

#include "asyncst/ast.hpp"
#include "asyncst/formula.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// All printers round-trip: parse(pretty(x)) is structurally equal to x
// (modulo the normalizations documented in docs/grammar.md).

// selfObject: fields of that object print as self.f; others as X.f.
std::string prettyTerm(const TermP& t, const std::string& selfObject = "");
std::string prettyFormula(const FormulaP& f, const std::string& selfObject = "");

std::string prettyExpr(const ExprP& e);
std::string prettyStmt(const StmtP& s, int indent = 0);
std::string prettyProgram(const Program& p);

std::string prettyGlobal(const GlobalType& g);
std::string prettyLocal(const LocalType& t);           // single line
std::string prettyLBody(const LBody& body, const std::string& selfObject);

}  // namespace asyncst

#endif  // ASYNCST_PRETTY_HPP_
