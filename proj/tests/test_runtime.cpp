#include <doctest.h>

#include <functional>
#include <set>

#include "asyncst/jsonio.hpp"
#include "asyncst/parse.hpp"
#include "asyncst/runtime.hpp"
#include "helpers.hpp"

using namespace asyncst;

TEST_CASE("initial configuration of the gui program") {
  Program p = testing::corpusProgram("gui.async");
  Configuration c = initialConfig(p);
  CHECK(c.objects.size() == 3);
  const ObjectState* u = c.object("U");
  REQUIRE(u);
  CHECK(std::get<Int>(u->heap.at("state")) == 0);
  CHECK(std::get<Int>(u->heap.at("expect")) == 1);
  CHECK(!u->active);
  REQUIRE(c.processes.size() == 1);
  CHECK(c.processes[0].status == ProcessState::St::Pending);
  CHECK(c.processes[0].method == "start");
  CHECK(std::get<Int>(c.processes[0].store.at("j")) == 20);
}

TEST_CASE("exactly one step is enabled initially") {
  Program p = testing::corpusProgram("gui.async");
  Configuration c = initialConfig(p);
  auto steps = enabledSteps(c, p);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].kind == StepId::K::Start);
}

TEST_CASE("two inactive objects each with a pending process give two starts") {
  Program p = parseProgram(
      "object A { Unit m(Int x) { Fut<Unit> f = B!k(1); return unit; } }"
      "object B { Unit k(Int y) { return unit; } }"
      "main { A!m(0); }");
  Configuration c = initialConfig(p);
  int futc = 0;
  // start A.m, then execute its call: now A.m is running, B.k pending
  auto s1 = enabledSteps(c, p);
  auto [e1, c1] = step(c, p, s1[0], futc);
  auto s2 = enabledSteps(c1, p);
  REQUIRE(s2.size() == 1);  // the call
  auto [e2, c2] = step(c1, p, s2[0], futc);
  CHECK(e2.kind == Event::K::Invocation);
  // A continues (return) and B can start: two enabled steps
  auto s3 = enabledSteps(c2, p);
  CHECK(s3.size() == 2);
}

TEST_CASE("a get on an unresolved future blocks") {
  Program p = testing::corpusProgram("deadlock.async");
  auto er = enumerateRuns(p, RunLimits{});
  CHECK(er.traces.empty());
  CHECK(er.stuck.size() >= 1);
  for (const auto& c : er.stuck) {
    CHECK(!c.terminated());
    CHECK(enabledSteps(c, p).empty());
  }
}

TEST_CASE("minimal program trace: start then resolve") {
  Program p = parseProgram("object A { Int m(Int x) { return 0; } } main { A!m(0); }");
  RunResult r = run(p, SchedulerKind::Fifo, 0, RunLimits{});
  REQUIRE(r.kind == RunResult::K::Completed);
  // Hand-applying the reduction rules from the pending initial process:
  // iREv(A,f0,m) then fEv(A,f0,m,0). Two visible events.
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].ev.kind == Event::K::InvocationReaction);
  CHECK(r.trace[1].ev.kind == Event::K::Resolving);
  CHECK(std::get<Int>(*r.trace[1].ev.value) == 0);
}

TEST_CASE("gui run produces the delegation event order") {
  Program p = testing::corpusProgram("gui.async");
  for (uint64_t seed : {1ull, 2ull, 3ull, 17ull}) {
    RunResult r = run(p, SchedulerKind::SeededRandom, seed, RunLimits{});
    REQUIRE(r.kind == RunResult::K::Completed);
    int iEvCmp = -1, iREvCmp = -1;
    for (int i = 0; i < (int)r.trace.size(); ++i) {
      const Event& ev = r.trace[i].ev;
      if (ev.kind == Event::K::Invocation && ev.caller == "U" && ev.method == "cmp") iEvCmp = i;
      if (ev.kind == Event::K::InvocationReaction && ev.object == "I" && ev.method == "cmp")
        iREvCmp = i;
    }
    REQUIRE(iEvCmp >= 0);
    REQUIRE(iREvCmp >= 0);
    CHECK(iEvCmp < iREvCmp);
  }
}

TEST_CASE("step is deterministic") {
  Program p = testing::corpusProgram("gui.async");
  Configuration c = initialConfig(p);
  int f1 = 0, f2 = 0;
  auto s = enabledSteps(c, p);
  auto [e1, c1] = step(c, p, s[0], f1);
  auto [e2, c2] = step(c, p, s[0], f2);
  CHECK(e1 == e2);
  CHECK(c1.processes.size() == c2.processes.size());
}

TEST_CASE("trace well-formedness invariants over all gui runs") {
  Program p = testing::corpusProgram("gui.async");
  auto er = enumerateRuns(p, RunLimits{});
  REQUIRE(!er.traces.empty());
  CHECK(er.stuck.empty());
  for (const Trace& tr : er.traces) {
    std::set<int> invoked;
    std::map<int, Value> resolved;
    std::set<int> started;
    for (const auto& [ev, cfg, after] : tr) {
      switch (ev.kind) {
        case Event::K::Invocation:
          CHECK(invoked.insert(ev.fut.id).second);  // future uniqueness
          break;
        case Event::K::InvocationReaction:
          CHECK(!cfg.activeAt(ev.object));  // the object was inactive
          started.insert(ev.fut.id);
          break;
        case Event::K::Resolving:
          resolved[ev.fut.id] = *ev.value;
          break;
        case Event::K::Fetch: {
          auto it = resolved.find(ev.fut.id);
          REQUIRE(it != resolved.end());  // fetch after resolve
          CHECK(valueEq(it->second, *ev.value));
          break;
        }
        case Event::K::None: break;
      }
    }
  }
}

TEST_CASE("internal-step reduction preserves the visible trace set") {
  // Oracle: a no-reduction enumerator over a small program yields the same
  // set of visible event sequences.
  Program p = parseProgram(
      "object A { Int m(Int x) { Int a = 1; Int b = a + 1; Fut<Int> f = B!k(b); return b; } }"
      "object B { Int k(Int y) { Int c = y * 2; return c; } }"
      "main { A!m(0); }");
  auto reduced = enumerateRuns(p, RunLimits{});
  // Unreduced exploration.
  std::set<std::string> full;
  std::function<void(Configuration, int, std::string, int)> explore =
      [&](Configuration c, int futc, std::string acc, int depth) {
        REQUIRE(depth < 200);
        auto steps = enabledSteps(c, p);
        if (steps.empty()) {
          full.insert(acc);
          return;
        }
        for (const auto& s : steps) {
          int fc = futc;
          auto [ev, next] = step(c, p, s, fc);
          std::string acc2 = acc;
          if (ev.kind != Event::K::None) acc2 += ev.str() + ";";
          explore(next, fc, acc2, depth + 1);
        }
      };
  explore(initialConfig(p), 0, "", 0);
  std::set<std::string> red;
  for (const auto& tr : reduced.traces) {
    std::string acc;
    for (const auto& tp : tr) acc += tp.ev.str() + ";";
    red.insert(acc);
  }
  CHECK(red == full);
}

TEST_CASE("points-to: direct flow, parameter flow, and enumerated resolvers") {
  Program p = testing::corpusProgram("gui.async");
  PointsTo pt = pointsToAnalysis(p);
  Location resumeX{Location::K::Local, "U", "resume", "x"};
  REQUIRE(pt.atLocation.count(resumeX));
  CHECK(pt.atLocation.at(resumeX) == std::set<MethodRef>{{"S", "cmp"}});
  Location startF{Location::K::Local, "U", "start", "f"};
  CHECK(pt.atLocation.at(startF) == std::set<MethodRef>{{"I", "cmp"}});

  // Two-hop parameter flow.
  Program relay = testing::corpusProgram("relay.async");
  PointsTo rpt = pointsToAnalysis(relay);
  Location cc{Location::K::Local, "R", "consume", "cc"};
  REQUIRE(rpt.atLocation.count(cc));
  CHECK(rpt.atLocation.at(cc) == std::set<MethodRef>{{"W", "work"}});

  // Soundness against actual resolvers on every enumerated trace.
  for (const char* name : {"gui.async", "relay.async", "twostage.async"}) {
    Program prog = testing::corpusProgram(name);
    PointsTo pts = pointsToAnalysis(prog);
    auto er = enumerateRuns(prog, RunLimits{});
    for (const Trace& tr : er.traces) {
      std::map<int, MethodRef> resolverOf;
      for (const auto& tp : tr)
        if (tp.ev.kind == Event::K::Resolving)
          resolverOf[tp.ev.fut.id] = {tp.ev.object, tp.ev.method};
      for (const auto& tp : tr) {
        if (tp.ev.kind != Event::K::Fetch) continue;
        // find the static set of the reading process's current get
        const ProcessState* reader = nullptr;
        for (const auto& pr : tp.config.processes)
          if (tp.config.object(pr.object) && tp.config.object(pr.object)->active &&
              *tp.config.object(pr.object)->active == pr.fut && pr.object == tp.ev.object)
            reader = &pr;
        REQUIRE(reader);
        auto [head, tail] = std::pair<StmtP, StmtP>{nullptr, nullptr};
        std::vector<StmtP> list = seqToList(reader->rest);
        REQUIRE(!list.empty());
        const auto* g = list[0]->as<Stmt::Get>();
        REQUIRE(g);
        auto set = pts.forGet(*g);
        CHECK(set.count(resolverOf.at(tp.ev.fut.id)));
      }
    }
  }
}

TEST_CASE("traces round-trip through JSONL") {
  Program p = testing::corpusProgram("gui.async");
  RunResult r = run(p, SchedulerKind::Fifo, 0, RunLimits{});
  std::string jsonl = traceToJsonl(r.trace);
  Trace back = traceFromJsonl(jsonl);
  REQUIRE(back.size() == r.trace.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].ev == r.trace[i].ev);
    CHECK(back[i].config.processes.size() == r.trace[i].config.processes.size());
    CHECK(back[i].after.activeAt("U") == r.trace[i].after.activeAt("U"));
  }
}
