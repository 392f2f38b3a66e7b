#ifndef ASYNCST_LOGIC_HPP_
#define ASYNCST_LOGIC_HPP_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "asyncst/formula.hpp"
#include "asyncst/state.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Weakening.
// ---------------------------------------------------------------------------

// phi restricted to X: every field symbol of another object and every program
// variable not owned by X is replaced by a fresh logical variable,
// existentially quantified at the front. `extraKeep` names survive regardless
// of owner (the callee's parameters when checking the caller side of a call).
FormulaP weaken(const FormulaP& phi, const std::string& X,
                const std::set<std::string>& extraKeep = {});

bool isObjectFormula(const FormulaP& phi, const std::string& X);

// The state part of phi w.r.t. X: only X's fields survive; result and all
// process-local symbols are existentially quantified (the terminated
// process's locals mean nothing to the next process).
FormulaP statePart(const FormulaP& phi, const std::string& X);

// Keeps result and X's fields; quantifies everything else. What a future
// value resolved by X.m still guarantees at a later read.
FormulaP liftPost(const FormulaP& phi, const std::string& X);

// ---------------------------------------------------------------------------
// Configuration-level evaluation.
// ---------------------------------------------------------------------------
struct EvalFrame {
  const ProcessState* proc = nullptr;          // locals/params
  std::optional<Value> result;                 // binding for `result`
  std::string selfObject;                      // resolves self.f
  std::map<std::string, Value> extra;          // additional bindings (data env)
};

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& m) : std::runtime_error(m) {}
};

// Standard FO satisfaction; integer existentials range over the values in
// cfg plus {-1,0,1}; futures/objects over those present in cfg.
bool evalFormula(const FormulaP& phi, const Configuration& cfg, const EvalFrame& frame);

// Expression evaluation shared with the interpreter.
Value evalExpr(const ExprP& e, const std::map<std::string, Value>& locals,
               const std::map<std::string, Value>* heap);

// ---------------------------------------------------------------------------
// Weakest precondition.
// ---------------------------------------------------------------------------
struct PostFacts {
  // post(X.m, phi): callee postconditions collected from the global type.
  std::map<std::pair<std::string, std::string>, FormulaP> postOf;
  // Resolves a get statement to the methods that may have resolved its
  // future (Points-To); keyed by the statement node.
  std::function<std::set<std::pair<std::string, std::string>>(const Stmt::Get&)> resolveGet;
  // Declared types of locals in the method being checked (for havoc sorts).
  std::map<std::string, Sort> localSorts;

  FormulaP factsForGet(const Stmt::Get& g) const;
};

// Returns a modality-free formula equivalent to [history]post for loop-free
// histories. Calls havoc their targets with a freshness constraint; gets
// havoc the target and assume the resolver postconditions from ctx.
FormulaP wp(const StmtP& history, const FormulaP& post, const PostFacts& ctx,
            const std::string& selfObject);

// Expression-to-logic translations used by wp and the checker.
TermP exprToTerm(const ExprP& e, const std::string& selfObject);
FormulaP exprToFormula(const ExprP& e, const std::string& selfObject);

// ---------------------------------------------------------------------------
// Validity.
// ---------------------------------------------------------------------------
struct ValidityResult {
  enum class K { Valid, NotValid, Unknown } kind = K::Unknown;
  std::map<std::string, Value> counterexample;  // satisfies the negation
  std::string reason;                           // for Unknown

  bool valid() const { return kind == K::Valid; }
};

// Decides validity in the supported fragment: linear integer arithmetic
// atoms plus equality over futures, objects, booleans and list-Nil.
// Quantifiers over finite-character sorts are instantiated; integer
// quantifiers are eliminated by Fourier-Motzkin. Unknown is conservative.
ValidityResult checkValidity(const FormulaP& phi);

}  // namespace asyncst

#endif  // ASYNCST_LOGIC_HPP_
