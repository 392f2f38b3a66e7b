#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "asyncst/constraints.hpp"
#include "asyncst/jsonio.hpp"
#include "asyncst/parse.hpp"
#include "asyncst/pretty.hpp"
#include "asyncst/projection.hpp"
#include "asyncst/runtime.hpp"
#include "asyncst/typecheck.hpp"

namespace {

using namespace asyncst;

bool useColor() {
  const char* v = std::getenv("ASYNCST_COLOR");
  if (!v) return false;
  return std::string(v) == "1";
}

std::string paint(const std::string& s, const char* code) {
  if (!useColor()) return s;
  return std::string("\033[") + code + "m" + s + "\033[0m";
}

std::string readFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void writeFile(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

int cmdCheck(const std::string& progPath, const std::string& protoPath,
             const std::string& jsonReport) {
  Program p = parseProgram(readFile(progPath));
  GlobalType g = parseGlobalType(readFile(protoPath), &p);
  CheckReport rep = checkProgram(p, g);
  for (const auto& e : rep.errors) std::cerr << paint(e.str(), "31") << "\n";
  for (const auto& w : rep.warnings) std::cerr << paint("warning: " + w.str(), "33") << "\n";
  if (!jsonReport.empty()) writeFile(jsonReport, reportToJson(rep));
  std::cerr << (rep.ok ? paint("well-typed", "32") : paint("rejected", "31")) << "\n";
  return rep.exitCode();
}

int cmdProject(const std::string& protoPath, const std::string& progPath,
               const std::string& object, const std::string& method, bool asJson) {
  Program prog;
  const Program* pp = nullptr;
  if (!progPath.empty()) {
    prog = parseProgram(readFile(progPath));
    pp = &prog;
  }
  GlobalType g = parseGlobalType(readFile(protoPath), pp);
  std::vector<std::string> objects;
  if (!object.empty()) objects.push_back(object);
  else objects.assign(g.roles().begin(), g.roles().end());
  for (const auto& X : objects) {
    LocalType t = propagate(projectOnObject(g, X));
    if (method.empty()) {
      if (asJson) std::cout << localTypeToJson(t) << "\n";
      else std::cout << X << ": " << prettyLocal(t) << "\n";
      continue;
    }
    auto types = projectOnMethod(t, method);
    for (const auto& mt : types) {
      if (asJson) std::cout << localTypeToJson(mt) << "\n";
      else std::cout << X << "." << method << ": " << prettyLocal(mt) << "\n";
    }
  }
  return 0;
}

int cmdRun(const std::string& progPath, uint64_t seed, bool fifo, const std::string& tracePath,
           int maxSteps, int maxLoopIters) {
  Program p = parseProgram(readFile(progPath));
  RunLimits limits{maxSteps, maxLoopIters};
  RunResult r = run(p, fifo ? SchedulerKind::Fifo : SchedulerKind::SeededRandom, seed, limits);
  for (const auto& tp : r.trace) std::cout << tp.ev.str() << "\n";
  switch (r.kind) {
    case RunResult::K::Completed:
      std::cerr << paint("terminated", "32") << " (" << r.trace.size() << " events)\n";
      break;
    case RunResult::K::Stuck:
      std::cerr << paint("stuck (deadlock witness)", "31") << "\n";
      break;
    case RunResult::K::LimitExceeded:
      std::cerr << paint("limit exceeded", "33") << "\n";
      break;
  }
  if (!tracePath.empty()) writeFile(tracePath, traceToJsonl(r.trace));
  return r.kind == RunResult::K::Completed ? 0 : 1;
}

int cmdVerify(const std::string& progPath, const std::string& protoPath, bool exhaustive,
              int runs, uint64_t seed, const std::string& tracePath, int maxSteps,
              int maxLoopIters) {
  Program p = parseProgram(readFile(progPath));
  GlobalType g = parseGlobalType(readFile(protoPath), &p);
  TCP c = translateGlobal(g);

  if (!tracePath.empty()) {
    Trace tr = traceFromJsonl(readFile(tracePath));
    CheckResult res = checkTrace(tr, c);
    std::cout << (res.ok ? "trace adheres" : "trace violates: " + res.refutedLabel) << "\n";
    return res.ok ? 0 : 1;
  }

  RunLimits limits{maxSteps, maxLoopIters};
  std::vector<Trace> traces;
  int stuck = 0;
  if (exhaustive) {
    EnumerateResult er = enumerateRuns(p, limits);
    traces = std::move(er.traces);
    stuck = (int)er.stuck.size();
    if (er.limitExceededBranches)
      std::cerr << "note: " << er.limitExceededBranches << " branches hit the step limit\n";
  } else {
    // Seeded runs fan out across a small worker pool; results merge in seed
    // order so output is deterministic.
    std::vector<std::future<RunResult>> futs;
    for (int i = 0; i < runs; ++i) {
      futs.push_back(std::async(std::launch::async, [&, i] {
        return run(p, SchedulerKind::SeededRandom, seed + (uint64_t)i, limits);
      }));
    }
    int limited = 0;
    for (auto& f : futs) {
      RunResult r = f.get();
      if (r.kind == RunResult::K::Stuck) ++stuck;
      else if (r.kind == RunResult::K::LimitExceeded) ++limited;
      else traces.push_back(std::move(r.trace));
    }
    if (limited) std::cerr << "note: " << limited << " run(s) hit the step limit\n";
  }

  int ok = 0;
  std::string firstBad;
  for (size_t i = 0; i < traces.size(); ++i) {
    CheckResult res = checkTrace(traces[i], c);
    if (res.ok) ++ok;
    else if (firstBad.empty())
      firstBad = "trace " + std::to_string(i) + " violates: " + res.refutedLabel;
  }
  if (stuck) std::cout << stuck << " stuck run(s) found (deadlock witnesses)\n";
  if ((int)traces.size() == ok && !stuck) {
    std::cout << "all " << traces.size() << " traces adhere\n";
    return 0;
  }
  std::cout << ok << "/" << traces.size() << " traces adhere\n";
  if (!firstBad.empty()) std::cout << firstBad << "\n";
  return 1;
}

int cmdGraph(const std::string& protoPath, const std::string& progPath,
             const std::string& dotPath) {
  Program prog;
  const Program* pp = nullptr;
  if (!progPath.empty()) {
    prog = parseProgram(readFile(progPath));
    pp = &prog;
  }
  GlobalType g = parseGlobalType(readFile(protoPath), pp);
  BuiltGraph bg;
  AdmissibilityReport adm;
  if (pp) {
    CheckReport rep = checkProgram(prog, g);
    bg = std::move(rep.graph);
    adm = rep.adm;
    if (!rep.ok && rep.graph.graph.nodeCount() == 0) {
      std::cerr << "graph unavailable: protocol not well-formed\n";
      return 1;
    }
  } else {
    bg = buildPartialGraph(g);
    adm = admissible(bg.graph);
  }
  if (!dotPath.empty()) writeFile(dotPath, exportDot(bg.graph));
  std::cout << "nodes=" << bg.graph.nodeCount() << " solid=" << bg.graph.solid.size()
            << " indirect=" << bg.graph.indirect.size()
            << " points-to=" << bg.graph.getEdges.size() << "\n";
  std::cout << adm.str(bg.graph) << "\n";
  return adm.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asyncst: session-typed protocol analysis for active objects with futures"};
  app.require_subcommand(1);

  std::string progPath, protoPath, jsonReport, tracePath, dotPath, object, method;
  bool asJson = false, fifo = false, exhaustive = false;
  uint64_t seed = 1;
  int runs = 100, maxSteps = 500, maxLoopIters = 4;

  auto* check = app.add_subcommand("check", "type-check a program against a protocol");
  check->add_option("program", progPath)->required();
  check->add_option("protocol", protoPath)->required();
  check->add_option("--json-report", jsonReport, "write a JSON report ('-' for stdout)");

  auto* project = app.add_subcommand("project", "project a protocol onto objects/methods");
  project->add_option("protocol", protoPath)->required();
  project->add_option("--program", progPath, "program supplying signatures");
  project->add_option("--object", object);
  project->add_option("--method", method);
  project->add_flag("--json", asJson);

  auto* runCmd = app.add_subcommand("run", "interpret a program");
  runCmd->add_option("program", progPath)->required();
  runCmd->add_option("--seed", seed);
  runCmd->add_flag("--fifo", fifo, "deterministic fifo scheduler");
  runCmd->add_option("--trace", tracePath, "write the trace as JSON lines");
  runCmd->add_option("--max-steps", maxSteps);
  runCmd->add_option("--max-loop-iters", maxLoopIters);

  auto* verify = app.add_subcommand("verify", "check generated traces against the protocol");
  verify->add_option("program", progPath)->required();
  verify->add_option("protocol", protoPath)->required();
  verify->add_flag("--exhaustive", exhaustive, "enumerate all schedules");
  verify->add_option("--runs", runs, "number of seeded random runs");
  verify->add_option("--seed", seed);
  verify->add_option("--trace", tracePath, "verify a recorded JSONL trace instead");
  verify->add_option("--max-steps", maxSteps);
  verify->add_option("--max-loop-iters", maxLoopIters);

  auto* graph = app.add_subcommand("graph", "emit the causality graph");
  graph->add_option("protocol", protoPath)->required();
  graph->add_option("--program", progPath, "complete the graph with Points-To edges");
  graph->add_option("--dot", dotPath, "write Graphviz output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (check->parsed()) return cmdCheck(progPath, protoPath, jsonReport);
    if (project->parsed()) return cmdProject(protoPath, progPath, object, method, asJson);
    if (runCmd->parsed()) return cmdRun(progPath, seed, fifo, tracePath, maxSteps, maxLoopIters);
    if (verify->parsed())
      return cmdVerify(progPath, protoPath, exhaustive, runs, seed, tracePath, maxSteps,
                       maxLoopIters);
    if (graph->parsed()) return cmdGraph(protoPath, progPath, dotPath);
  } catch (const ParseError& e) {
    std::cerr << paint(std::string("parse error: ") + e.what(), "31") << "\n";
    return 1;
  } catch (const ProjectionUndefined& e) {
    std::cerr << paint(std::string("projection undefined: ") + e.what(), "31") << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << paint(std::string("error: ") + e.what(), "31") << "\n";
    return 1;
  }
  return 64;
}
