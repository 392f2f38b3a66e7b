#ifndef ASYNCST_STATE_HPP_
#define ASYNCST_STATE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asyncst/ast.hpp"
#include "asyncst/value.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Events. iEv | iREv | fEv | fREv | noEv.
// ---------------------------------------------------------------------------
struct Event {
  enum class K { Invocation, InvocationReaction, Resolving, Fetch, None } kind = K::None;
  std::string caller;           // Invocation only
  std::string object;           // acting/callee object
  FutId fut;
  std::string method;           // not set for Fetch
  std::vector<Value> args;      // Invocation only
  std::optional<Value> value;   // Resolving / Fetch

  bool operator==(const Event&) const = default;
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Configurations: processes + objects.
// ---------------------------------------------------------------------------
struct ProcessState {
  enum class St { Pending, Running, Done } status = St::Pending;
  std::string object;
  FutId fut;
  std::string method;
  StmtP rest;                          // remaining statements while Running/Pending
  std::map<std::string, Value> store;  // locals including parameters
  Value retval = Unit{};               // once Done
};

struct ObjectState {
  std::string name;
  std::optional<FutId> active;
  std::map<std::string, Value> heap;
};

struct Configuration {
  std::vector<ObjectState> objects;
  std::vector<ProcessState> processes;

  const ObjectState* object(const std::string& x) const;
  ObjectState* object(const std::string& x);
  const ProcessState* process(FutId f) const;
  ProcessState* process(FutId f);
  bool terminated() const;
  bool activeAt(const std::string& x) const;
};

// One trace entry: the event, the configuration in which it fired, and the
// configuration right after. NoEv steps are filtered out of traces.
struct TracePair {
  Event ev;
  Configuration config;  // C(i): the firing configuration
  Configuration after;   // post-state; used by A(i,X) and location clauses
};
using Trace = std::vector<TracePair>;

// Events acted by an object: the caller for iEv, the callee for iREv/fEv,
// the reader for fREv.
std::string actorOf(const Event& ev);

Trace restrictToObject(const Trace& tr, const std::string& x);

}  // namespace asyncst

#endif  // ASYNCST_STATE_HPP_
