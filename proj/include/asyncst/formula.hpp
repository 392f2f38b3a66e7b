#ifndef ASYNCST_FORMULA_HPP_
#define ASYNCST_FORMULA_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "asyncst/ast.hpp"
#include "asyncst/base.hpp"
#include "asyncst/value.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Terms. Heap access is select/store over an explicit heap symbol; surface
// field reads X.f / self.f are parsed into Select over the ambient heap so
// the select(store(...)) axiom applies uniformly during wp.
// ---------------------------------------------------------------------------
struct Term;
using TermP = std::shared_ptr<const Term>;

// Who owns a program symbol; drives weakening.
enum class VarRole {
  Logical,      // bound by a quantifier
  CalleeParam,  // parameter of the callee of the annotated call
  CallerSide,   // local/param of the caller's active method
  Unresolved,   // plain program variable without protocol context
};

struct Term {
  struct Var {
    std::string name;
    Sort sort;
    VarRole role;
    std::string owner;  // object name for program symbols, "" otherwise
  };
  struct Lit { Value v; };
  struct HeapSym {};  // the ambient heap variable
  struct Select { TermP heap; std::string object; std::string field; };
  struct Store { TermP heap; std::string object; std::string field; TermP value; };
  struct Result {};
  struct SelfRef {};
  struct Fn { std::string op; std::vector<TermP> args; };  // + - * length

  std::variant<Var, Lit, HeapSym, Select, Store, Result, SelfRef, Fn> node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

TermP mkVar(std::string name, Sort sort = Sort::Unknown,
            VarRole role = VarRole::Unresolved, std::string owner = "");
TermP mkLit(Value v);
TermP mkHeap();
TermP mkSelect(TermP heap, std::string object, std::string field);
TermP mkStore(TermP heap, std::string object, std::string field, TermP value);
TermP mkResult();
TermP mkSelf();
TermP mkFn(std::string op, std::vector<TermP> args);

// Convenience: field read over the ambient heap.
TermP mkField(std::string object, std::string field);

// ---------------------------------------------------------------------------
// Formulas.
// ---------------------------------------------------------------------------
struct Formula;
using FormulaP = std::shared_ptr<const Formula>;

struct Formula {
  struct Top {};
  struct Neg { FormulaP f; };
  struct Or { FormulaP l, r; };
  struct And { FormulaP l, r; };
  struct Cmp {
    enum class Op { Geq, Gt, Eq } op;
    TermP l, r;
  };
  struct BoolAtom { TermP t; };  // boolean-sorted term as a formula
  struct Pred { std::string name; std::vector<TermP> args; };
  struct Exists { Sort sort; std::string var; FormulaP body; };
  struct Forall { Sort sort; std::string var; FormulaP body; };  // for wp havoc
  struct Modal { StmtP stmt; FormulaP body; };

  std::variant<Top, Neg, Or, And, Cmp, BoolAtom, Pred, Exists, Forall, Modal> node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

FormulaP mkTop();
FormulaP mkNeg(FormulaP f);
FormulaP mkOr(FormulaP l, FormulaP r);
FormulaP mkAnd(FormulaP l, FormulaP r);
FormulaP mkCmp(Formula::Cmp::Op op, TermP l, TermP r);
FormulaP mkBoolAtom(TermP t);
FormulaP mkPred(std::string name, std::vector<TermP> args);
FormulaP mkExists(Sort sort, std::string var, FormulaP body);
FormulaP mkForall(Sort sort, std::string var, FormulaP body);
FormulaP mkModal(StmtP stmt, FormulaP body);

FormulaP mkEq(TermP l, TermP r);
FormulaP mkNeq(TermP l, TermP r);
FormulaP mkBot();  // !top

FormulaP conjoin(const std::vector<FormulaP>& fs);

// Conjunction that floats the left operand's leading existential prefix over
// the conjunction (capture-avoiding). Used by propagation so the result
// prints the way the projected types do.
FormulaP conjoinScoped(FormulaP base, FormulaP extra);

bool isTop(const FormulaP& f);
bool containsModal(const FormulaP& f);
bool mentionsResult(const FormulaP& f);

// ---------------------------------------------------------------------------
// Structural operations.
// ---------------------------------------------------------------------------

// Alpha-blind structural equality (bound variables canonically renamed).
bool alphaEqual(const FormulaP& a, const FormulaP& b);
bool termEqual(const TermP& a, const TermP& b);

// Capture-avoiding substitutions used by wp and the translators.
FormulaP substVar(const FormulaP& f, const std::string& name, const TermP& replacement);
FormulaP substResult(const FormulaP& f, const TermP& replacement);
// Replaces every select of (object, field) over the *ambient* heap.
FormulaP substField(const FormulaP& f, const std::string& object,
                    const std::string& field, const TermP& replacement);
TermP substVarT(const TermP& t, const std::string& name, const TermP& replacement);

// Applies the select/store axiom and boolean/ground simplifications.
TermP simplifyTerm(const TermP& t);
FormulaP simplify(const FormulaP& f);

// Free program-symbol collection (excludes bound logical variables).
struct SymbolInfo {
  enum class K { Var, Field, Result, Self } kind;
  std::string name;   // variable or field name
  std::string owner;  // object for fields / owned vars
  VarRole role = VarRole::Unresolved;
  Sort sort = Sort::Unknown;
  auto operator<=>(const SymbolInfo&) const = default;
};
std::set<SymbolInfo> freeSymbols(const FormulaP& f);
std::set<std::string> freeLogicalVars(const FormulaP& f);
std::set<std::string> objectsOf(const FormulaP& f);  // objects whose fields occur

std::string freshName(const std::string& base, const std::set<std::string>& taken);

}  // namespace asyncst

#endif  // ASYNCST_FORMULA_HPP_
