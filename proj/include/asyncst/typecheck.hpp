#ifndef ASYNCST_TYPECHECK_HPP_
#define ASYNCST_TYPECHECK_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "asyncst/causality.hpp"
#include "asyncst/projection.hpp"
#include "asyncst/runtime.hpp"

namespace asyncst {

struct CheckIssue {
  std::string rule;   // rule name ("T-Get", "projection rule 2", ...)
  std::string where;  // "U.resume" etc.
  std::string message;

  std::string str() const {
    std::string s = "[" + rule + "]";
    if (!where.empty()) s += " " + where + ":";
    return s + " " + message;
  }
};

struct CheckReport {
  bool ok = true;
  bool unknown = false;  // a validity premise left the decidable fragment
  std::vector<CheckIssue> errors;
  std::vector<CheckIssue> warnings;
  BuiltGraph graph;  // completed causality graph (when it was built)
  AdmissibilityReport adm;

  int exitCode() const { return ok ? 0 : (unknown ? 2 : 1); }
};

// Full phase-2 judgment: well-formedness of G, role coverage, the main
// call, per-object/method statement checking, and admissibility of the
// completed causality graph.
CheckReport checkProgram(const Program& p, const GlobalType& g);

// Object-type segments in object-type order, with their method names.
std::vector<std::pair<std::string, LocalType>> methodSegmentsInOrder(const LocalType& obj);

}  // namespace asyncst

#endif  // ASYNCST_TYPECHECK_HPP_
