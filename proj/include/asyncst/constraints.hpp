#ifndef ASYNCST_CONSTRAINTS_HPP_
#define ASYNCST_CONSTRAINTS_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "asyncst/state.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// Constraints over trace positions (MSO over finite words). Position
// quantifiers are window-relativized; the Kleene-star set quantifier is the
// ordered-boundary form evaluated by segmentation search.
struct TC;
using TCP = std::shared_ptr<const TC>;

// Event pattern slot: literal value, binder, or wildcard. A binder binds on
// first match and checks on later occurrences within its scope.
struct Slot {
  enum class K { Any, Lit, Var } kind = K::Any;
  Value lit;
  std::string var;

  static Slot any() { return {}; }
  static Slot of(Value v) { return Slot{K::Lit, std::move(v), ""}; }
  static Slot bind(std::string name) { return Slot{K::Var, Unit{}, std::move(name)}; }
};

struct EventPattern {
  Event::K kind = Event::K::None;
  std::optional<std::string> caller;  // iEv only
  std::optional<std::string> object;
  std::optional<std::string> method;
  Slot fut;                 // future slot
  Slot value;               // fEv / fREv payload
  std::vector<std::pair<std::string, size_t>> argBinds;  // name <- args[i]
};

// How a ConfigSat resolves frame symbols.
struct FrameHint {
  enum class K {
    None,            // fields only
    ProcOfFut,       // locals of the process with the bound future `futVar`
    ActiveProcOf,    // locals of `object`'s active process
  } kind = K::None;
  std::string object;
  std::string futVar;
  std::optional<std::string> resultVar;  // bind result from this data var
  std::vector<std::pair<std::string, std::string>> extraFromData;  // sym <- data var
};

struct TC {
  struct True {};
  struct And { std::vector<TCP> cs; };
  struct Or { std::vector<TCP> cs; };
  struct Not { TCP c; };
  // Exists position; windowed anchors range over the current window, free
  // ones over the whole trace (resolving events are unconstrained in
  // position).
  struct ExistsPos { std::string var; bool windowed; TCP body; };
  struct ForallPos { std::string var; bool windowed; TCP body; };
  struct EventMatch { std::string posVar; EventPattern pattern; };
  struct ConfigSat {
    std::string posVar;
    FormulaP formula;
    FrameHint frame;
    bool afterFire = false;  // evaluate in the post-state of the event
  };
  struct PosCompare {
    enum class Op { Lt, Le, Eq, Ne } op;
    std::string a, b;  // position variables
  };
  struct ResPred { std::string posVar; };
  struct ActivePred { std::string posVar; std::string object; };
  // Every object-active position in the window except the named anchors is a
  // resolving event (the floating-termination clause of the translation).
  struct ResElsewhere { std::string object; std::vector<std::string> exceptVars; };
  struct FirstTerm { std::string posVar; std::string object; };
  struct LastTerm { std::string posVar; std::string object; std::string method; };
  // Rule-3 sequencing: exists a split of the current window.
  struct SeqSplit { TCP head; TCP tail; };
  // Kleene star via ordered boundary sets.
  struct ExistsSet {
    std::string setVar;
    FormulaP invariant;   // holds at every boundary
    TCP segment;          // each consecutive-boundary window satisfies this
  };
  // Local passive choice: branch on the last resolving event of src.method
  // in the window (vacuous when the window holds none, e.g. on restricted
  // traces).
  struct OfferGuard {
    std::string srcObject;
    std::string srcMethod;
    FormulaP guard;  // evaluated with result bound to the resolving value
    TCP body;
  };
  struct WindowEmpty {};
  // Clamps the evaluation window (relativization to a subtrace).
  struct Window { int lo; int hi; TCP body; };

  std::variant<True, And, Or, Not, ExistsPos, ForallPos, EventMatch, ConfigSat, PosCompare,
               ResPred, ActivePred, ResElsewhere, FirstTerm, LastTerm, SeqSplit, ExistsSet,
               OfferGuard, WindowEmpty, Window>
      node;
  std::string label;  // diagnostic tag ("U: item 3" etc.)

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

template <class N>
TCP mkTC(N n, std::string label = "") {
  auto t = std::make_shared<TC>(TC{std::move(n), std::move(label)});
  return t;
}

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// Syntactic window restriction of every windowed quantifier; used by the
// property tests. The evaluator applies windows natively.
TCP relativize(const TCP& c, int lo, int hi);

TCP translateGlobal(const GlobalType& g);
TCP translateLocal(const LocalType& l);

struct CheckResult {
  bool ok = true;
  std::string refutedLabel;       // first failing labeled conjunct
  std::vector<int> witnessSplits; // split positions of the last success path
};

CheckResult checkTrace(const Trace& tr, const TCP& c);

// Evaluation of one constraint over an explicit window; the brute-force
// Kleene oracle in the tests drives this directly.
bool evalConstraintWindow(const Trace& tr, const TCP& c, int lo, int hi);

// Test hook: evaluates an ExistsSet node by enumerating all boundary subsets
// (exponential); must agree with the segmentation search.
bool bruteForceExistsSet(const Trace& tr, const TC::ExistsSet& node, int lo, int hi);

}  // namespace asyncst

#endif  // ASYNCST_CONSTRAINTS_HPP_
