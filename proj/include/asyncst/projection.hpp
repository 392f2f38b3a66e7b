#ifndef ASYNCST_PROJECTION_HPP_
#define ASYNCST_PROJECTION_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "asyncst/logic.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// No rule matches: carries the failing rule and location.
class ProjectionUndefined : public std::runtime_error {
 public:
  ProjectionUndefined(std::string rule, std::string msg, SrcLoc loc = {})
      : std::runtime_error("[" + rule + "] " + msg +
                           (loc.known() ? " (at " + loc.str() + ")" : "")),
        rule_(std::move(rule)), msg_(std::move(msg)), loc_(loc) {}
  const std::string& rule() const { return rule_; }
  const std::string& message() const { return msg_; }

 private:
  std::string rule_, msg_;
  SrcLoc loc_;
};

// Last active postcondition plus the method that produced it.
struct ActiveEntry {
  FormulaP post;
  std::string method;
};
using ActiveMap = std::map<std::string, ActiveEntry>;  // absent key = undefined

// Phase-1 operations. All results are skip-normalized.
LocalType projectOnObject(const GlobalType& g, const std::string& X);
LocalType propagate(const LocalType& t);
std::vector<LocalType> projectOnMethod(const LocalType& objectType, const std::string& m);

// Methods an object is obliged to implement by its (projected) type.
std::set<std::string> methodsOf(const LocalType& t);

// All weakenings of phi imply phi (loop invariants must not tie several
// heaps together).
bool csCheck(const FormulaP& phi);

struct WfReport {
  bool ok = true;
  std::vector<Diagnostic> issues;
};
WfReport wellFormed(const GlobalType& g);

// post(X.m, phi) database: callee postconditions keyed by (object, method);
// branch posts are folded in disjunctively.
std::map<std::pair<std::string, std::string>, FormulaP> postDatabase(const GlobalType& g);

// Post(G): the conjunction of all postconditions, each reduced to its
// heap-state part (result and process locals existentially closed).
FormulaP postConjunction(const GlobalType& g);

}  // namespace asyncst

#endif  // ASYNCST_PROJECTION_HPP_
