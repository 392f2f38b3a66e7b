#ifndef ASYNCST_RUNTIME_HPP_
#define ASYNCST_RUNTIME_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "asyncst/ast.hpp"
#include "asyncst/state.hpp"

namespace asyncst {

// One applicable reduction-rule instance.
struct StepId {
  enum class K { Start, Call, Sync, End, Internal } kind = K::Internal;
  FutId fut;  // the process taking the step

  std::string str() const;
  bool visible() const { return kind != K::Internal; }
};

Configuration initialConfig(const Program& p);

std::vector<StepId> enabledSteps(const Configuration& c, const Program& p);

// Exact small-step per the reduction rules; fresh futures come from
// futCounter. Internal steps return a None event.
std::pair<Event, Configuration> step(const Configuration& c, const Program& p,
                                     const StepId& s, int& futCounter);

struct RunLimits {
  int maxSteps = 500;
  int maxLoopIters = 4;
};

enum class SchedulerKind { SeededRandom, Fifo, Script };

struct RunResult {
  enum class K { Completed, Stuck, LimitExceeded } kind = K::Completed;
  Trace trace;
  Configuration last;  // stuck configuration when kind == Stuck
};

RunResult run(const Program& p, SchedulerKind sched, uint64_t seed, const RunLimits& limits,
              const std::vector<int>* script = nullptr);

// DFS over all scheduler choices; internal steps are applied eagerly (they
// commute: an internal step touches only its own process and its object's
// heap, and no other process of that object runs concurrently).
struct EnumerateResult {
  std::vector<Trace> traces;
  std::vector<Configuration> stuck;
  int limitExceededBranches = 0;
};

EnumerateResult enumerateRuns(const Program& p, const RunLimits& limits);

// ---------------------------------------------------------------------------
// Points-To for futures (inclusion-based).
// ---------------------------------------------------------------------------
using MethodRef = std::pair<std::string, std::string>;  // (object, method)

struct PointsTo {
  // Keyed by the address of the Get alternative inside the (shared) AST.
  std::map<const void*, std::set<MethodRef>> atGet;
  std::map<Location, std::set<MethodRef>> atLocation;

  std::set<MethodRef> forGet(const Stmt::Get& g) const {
    auto it = atGet.find(static_cast<const void*>(&g));
    return it == atGet.end() ? std::set<MethodRef>{} : it->second;
  }
};

PointsTo pointsToAnalysis(const Program& p);

}  // namespace asyncst

#endif  // ASYNCST_RUNTIME_HPP_
