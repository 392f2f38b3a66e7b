#ifndef ASYNCST_PARSE_HPP_
#define ASYNCST_PARSE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asyncst/ast.hpp"
#include "asyncst/formula.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// Grammar is documented in docs/grammar.md.

// Parses and validates an Async program. Throws ParseError on syntax errors,
// duplicate names, unresolved references and return-position violations.
Program parseProgram(const std::string& text);

// Parses a protocol file. Formula symbols are resolved against the call
// items' declared parameter lists and location annotations; when a program
// is supplied its signatures take precedence for sorts.
GlobalType parseGlobalType(const std::string& text, const Program* prog = nullptr);

// Parses the ASCII rendering of a local type of `object` (round-trips with
// prettyLocal).
LocalType parseLocalType(const std::string& text, const std::string& object);

// How bare identifiers in a formula resolve; used by the formula parser.
struct SymbolScope {
  // Known symbol -> (owner object, role, sort).
  struct Entry {
    std::string owner;
    VarRole role = VarRole::Unresolved;
    Sort sort = Sort::Unknown;
  };
  std::map<std::string, Entry> names;
  std::string selfObject;      // bare fields / self.f resolve to this object
  std::string defaultOwner;    // fallback owner for unknown bare names
  VarRole defaultRole = VarRole::Unresolved;
};

// Parses a single formula (test and tooling helper).
FormulaP parseFormula(const std::string& text, const SymbolScope& scope = {});

}  // namespace asyncst

#endif  // ASYNCST_PARSE_HPP_
