#include "asyncst/runtime.hpp"

#include <functional>
#include <random>

#include "asyncst/logic.hpp"

namespace asyncst {

std::string StepId::str() const {
  const char* k = kind == K::Start ? "start"
                  : kind == K::Call ? "call"
                  : kind == K::Sync ? "sync"
                  : kind == K::End ? "end"
                                   : "internal";
  return std::string(k) + "@fut" + std::to_string(fut.id);
}

namespace {

// First statement of a sequence plus the remainder; re-associates nested
// sequences left by control-flow splicing.
std::pair<StmtP, StmtP> uncons(const StmtP& s) {
  StmtP cur = s;
  StmtP tail;
  while (const auto* seq = cur->as<Stmt::Seq>()) {
    tail = tail ? mkStmt(Stmt::Seq{seq->second, tail}, seq->second->loc) : seq->second;
    cur = seq->first;
  }
  return {cur, tail};
}

StmtP consTail(const StmtP& head, const StmtP& tail) {
  if (!tail) return head;
  return mkStmt(Stmt::Seq{head, tail}, head->loc);
}

Value evalIn(const Configuration& c, const ProcessState& p, const ExprP& e) {
  const ObjectState* o = c.object(p.object);
  return evalExpr(e, p.store, o ? &o->heap : nullptr);
}

}  // namespace

Configuration initialConfig(const Program& prog) {
  Configuration c;
  for (const auto& od : prog.objects) {
    ObjectState os;
    os.name = od.name;
    for (const auto& f : od.fields) {
      os.heap[f.name] = evalExpr(f.init, {}, nullptr);
    }
    c.objects.push_back(std::move(os));
  }
  const MethodDecl* m = prog.method(prog.mainCallee, prog.mainMethod);
  if (!m) throw InternalError("main references an unknown method");
  ProcessState ps;
  ps.status = ProcessState::St::Pending;
  ps.object = prog.mainCallee;
  ps.fut = FutId{0};
  ps.method = prog.mainMethod;
  ps.rest = m->body;
  for (size_t i = 0; i < m->params.size(); ++i) {
    ps.store[m->params[i].second] = evalExpr(prog.mainArgs[i], {}, nullptr);
  }
  c.processes.push_back(std::move(ps));
  return c;
}

std::vector<StepId> enabledSteps(const Configuration& c, const Program& prog) {
  std::vector<StepId> out;
  for (const auto& p : c.processes) {
    if (p.status == ProcessState::St::Done) continue;
    const ObjectState* o = c.object(p.object);
    if (!o) continue;
    if (p.status == ProcessState::St::Pending) {
      if (!o->active) out.push_back(StepId{StepId::K::Start, p.fut});
      continue;
    }
    if (!o->active || *o->active != p.fut) continue;  // not scheduled
    auto [head, tail] = uncons(p.rest);
    if (head->as<Stmt::Call>()) {
      out.push_back(StepId{StepId::K::Call, p.fut});
    } else if (const auto* g = head->as<Stmt::Get>()) {
      Value fv = evalIn(c, p, g->fut);
      const FutId* f = std::get_if<FutId>(&fv);
      if (f) {
        const ProcessState* resolver = c.process(*f);
        if (resolver && resolver->status == ProcessState::St::Done)
          out.push_back(StepId{StepId::K::Sync, p.fut});
        // Unresolved future: blocked, no step (rule sync premise fails).
      }
    } else if (head->as<Stmt::Return>()) {
      out.push_back(StepId{StepId::K::End, p.fut});
    } else {
      out.push_back(StepId{StepId::K::Internal, p.fut});
    }
  }
  return out;
}

std::pair<Event, Configuration> step(const Configuration& c0, const Program& prog,
                                     const StepId& s, int& futCounter) {
  Configuration c = c0;
  ProcessState* p = c.process(s.fut);
  if (!p) throw InternalError("step: no such process");
  ObjectState* o = c.object(p->object);
  Event ev;

  switch (s.kind) {
    case StepId::K::Start: {
      if (o->active) throw InternalError("step: start on an active object");
      o->active = p->fut;
      p->status = ProcessState::St::Running;
      ev.kind = Event::K::InvocationReaction;
      ev.object = p->object;
      ev.fut = p->fut;
      ev.method = p->method;
      break;
    }
    case StepId::K::Call: {
      auto [head, tail] = uncons(p->rest);
      const auto* call = head->as<Stmt::Call>();
      if (!call) throw InternalError("step: call expected");
      const MethodDecl* m = prog.method(call->callee, call->method);
      if (!m) throw InternalError("step: unknown callee");
      std::vector<Value> args;
      for (const auto& a : call->args) args.push_back(evalIn(c, *p, a));
      FutId fresh{++futCounter};
      ProcessState np;
      np.status = ProcessState::St::Pending;
      np.object = call->callee;
      np.fut = fresh;
      np.method = call->method;
      np.rest = m->body;
      for (size_t i = 0; i < m->params.size(); ++i) np.store[m->params[i].second] = args[i];
      if (call->target) {
        if (call->fieldTarget) o->heap[*call->target] = fresh;
        else p->store[*call->target] = fresh;
      }
      p->rest = tail ? tail : mkStmt(Stmt::Skip{});
      if (!tail) throw InternalError("step: call cannot be the final statement");
      ev.kind = Event::K::Invocation;
      ev.caller = p->object;
      ev.object = call->callee;
      ev.fut = fresh;
      ev.method = call->method;
      ev.args = std::move(args);
      c.processes.push_back(std::move(np));
      break;
    }
    case StepId::K::Sync: {
      auto [head, tail] = uncons(p->rest);
      const auto* g = head->as<Stmt::Get>();
      if (!g) throw InternalError("step: get expected");
      Value fv = evalIn(c, *p, g->fut);
      const FutId* f = std::get_if<FutId>(&fv);
      if (!f) throw InternalError("step: get on a non-future");
      const ProcessState* resolver = c.process(*f);
      if (!resolver || resolver->status != ProcessState::St::Done)
        throw InternalError("step: sync on an unresolved future");
      Value v = resolver->retval;
      if (g->fieldTarget) o->heap[g->target] = v;
      else p->store[g->target] = v;
      if (!tail) throw InternalError("step: get cannot be the final statement");
      p->rest = tail;
      ev.kind = Event::K::Fetch;
      ev.object = p->object;
      ev.fut = *f;
      ev.value = v;
      break;
    }
    case StepId::K::End: {
      auto [head, tail] = uncons(p->rest);
      const auto* r = head->as<Stmt::Return>();
      if (!r) throw InternalError("step: return expected");
      Value v = evalIn(c, *p, r->expr);
      p->status = ProcessState::St::Done;
      p->retval = v;
      p->rest = nullptr;
      o->active.reset();
      ev.kind = Event::K::Resolving;
      ev.object = p->object;
      ev.fut = p->fut;
      ev.method = p->method;
      ev.value = v;
      break;
    }
    case StepId::K::Internal: {
      auto [head, tail] = uncons(p->rest);
      if (const auto* a = head->as<Stmt::Assign>()) {
        Value v = evalIn(c, *p, a->expr);
        if (a->fieldTarget) o->heap[a->target] = v;
        else p->store[a->target] = v;
        p->rest = tail;
      } else if (head->as<Stmt::Skip>()) {
        p->rest = tail;
      } else if (const auto* i = head->as<Stmt::If>()) {
        Value g = evalIn(c, *p, i->guard);
        const bool* b = std::get_if<bool>(&g);
        if (!b) throw InternalError("step: non-boolean if guard");
        p->rest = consTail(*b ? i->thenS : i->elseS, tail);
      } else if (const auto* w = head->as<Stmt::While>()) {
        Value g = evalIn(c, *p, w->guard);
        const bool* b = std::get_if<bool>(&g);
        if (!b) throw InternalError("step: non-boolean while guard");
        if (*b) {
          p->rest = consTail(w->body, consTail(head, tail));
        } else {
          p->rest = tail;
        }
      } else {
        throw InternalError("step: unexpected internal statement");
      }
      if (!p->rest) throw InternalError("step: statement list underrun");
      ev.kind = Event::K::None;
      break;
    }
  }
  return {std::move(ev), std::move(c)};
}

// ---------------------------------------------------------------------------
// Drivers.
// ---------------------------------------------------------------------------
namespace {

// Counts while-guard-true evaluations per (process, loop site).
struct LoopMeter {
  std::map<std::pair<int, const void*>, int> counts;

  bool exceeded(const Configuration& c, const StepId& s, int maxIters) {
    if (s.kind != StepId::K::Internal) return false;
    const ProcessState* p = c.process(s.fut);
    auto [head, tail] = uncons(p->rest);
    const auto* w = head->as<Stmt::While>();
    if (!w) return false;
    Value g = evalIn(c, *p, w->guard);
    const bool* b = std::get_if<bool>(&g);
    if (!b || !*b) return false;
    int& n = counts[{s.fut.id, static_cast<const void*>(w)}];
    return ++n > maxIters;
  }
};

}  // namespace

RunResult run(const Program& p, SchedulerKind sched, uint64_t seed, const RunLimits& limits,
              const std::vector<int>* script) {
  RunResult res;
  Configuration c = initialConfig(p);
  int futCounter = 0;
  int steps = 0;
  size_t scriptPos = 0;
  std::mt19937_64 rng(seed);
  LoopMeter meter;
  for (;;) {
    std::vector<StepId> avail = enabledSteps(c, p);
    if (avail.empty()) {
      res.kind = c.terminated() ? RunResult::K::Completed : RunResult::K::Stuck;
      res.last = c;
      return res;
    }
    if (++steps > limits.maxSteps) {
      res.kind = RunResult::K::LimitExceeded;
      res.last = c;
      return res;
    }
    size_t pick = 0;
    switch (sched) {
      case SchedulerKind::Fifo: pick = 0; break;
      case SchedulerKind::SeededRandom:
        pick = std::uniform_int_distribution<size_t>(0, avail.size() - 1)(rng);
        break;
      case SchedulerKind::Script:
        if (script && scriptPos < script->size())
          pick = (size_t)(*script)[scriptPos++] % avail.size();
        break;
    }
    if (meter.exceeded(c, avail[pick], limits.maxLoopIters)) {
      res.kind = RunResult::K::LimitExceeded;
      res.last = c;
      return res;
    }
    auto [ev, next] = step(c, p, avail[pick], futCounter);
    if (ev.kind != Event::K::None) res.trace.push_back(TracePair{ev, c, next});
    c = std::move(next);
  }
}

namespace {

struct Enumerator {
  const Program& prog;
  const RunLimits& limits;
  EnumerateResult out;

  void explore(Configuration c, int futCounter, Trace trace, int depth, LoopMeter meter) {
    for (;;) {
      if (depth > limits.maxSteps) {
        ++out.limitExceededBranches;
        return;
      }
      std::vector<StepId> avail = enabledSteps(c, prog);
      if (avail.empty()) {
        if (c.terminated()) out.traces.push_back(trace);
        else out.stuck.push_back(c);
        return;
      }
      // Partial-order reduction: internal steps commute; take the first one
      // deterministically instead of branching.
      const StepId* internal = nullptr;
      for (const auto& s : avail)
        if (!s.visible()) {
          internal = &s;
          break;
        }
      if (internal) {
        if (meter.exceeded(c, *internal, limits.maxLoopIters)) {
          ++out.limitExceededBranches;
          return;
        }
        auto [ev, next] = step(c, prog, *internal, futCounter);
        c = std::move(next);
        ++depth;
        continue;
      }
      for (const auto& s : avail) {
        int fc = futCounter;
        auto [ev, next] = step(c, prog, s, fc);
        Trace t2 = trace;
        t2.push_back(TracePair{ev, c, next});
        explore(std::move(next), fc, std::move(t2), depth + 1, meter);
      }
      return;
    }
  }
};

}  // namespace

EnumerateResult enumerateRuns(const Program& p, const RunLimits& limits) {
  Enumerator e{p, limits, {}};
  e.explore(initialConfig(p), 0, {}, 0, LoopMeter{});
  return std::move(e.out);
}

}  // namespace asyncst
