#include <doctest.h>

#include <functional>
#include <random>

#include "asyncst/causality.hpp"
#include "asyncst/parse.hpp"
#include "helpers.hpp"

using namespace asyncst;

namespace {

BuiltGraph guiGraph(bool withGetEdge) {
  GlobalType g = testing::corpusProto("gui.proto");
  BuiltGraph bg = buildPartialGraph(g);
  if (withGetEdge) {
    std::map<std::string, std::vector<std::set<MethodRef>>> rr;
    rr["U"] = {{{"S", "cmp"}}};
    addGetEdges(bg, rr);
  }
  return bg;
}

// Brute-force cycle check: enumerate all simple paths.
bool bruteHasCycle(const CausalityGraph& g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& [a, b] : g.solid) adj[a].push_back(b);
  for (const auto& [a, b] : g.indirect) adj[a].push_back(b);
  for (int start = 0; start < (int)g.nodes.size(); ++start) {
    std::vector<int> stack{start};
    std::function<bool(int)> go = [&](int u) -> bool {
      for (int v : adj[u]) {
        if (v == start) return true;
        if (std::find(stack.begin(), stack.end(), v) != stack.end()) continue;
        stack.push_back(v);
        if (go(v)) return true;
        stack.pop_back();
      }
      return false;
    };
    if (go(start)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("gui graph: 12 nodes in three rows, one dotted edge, three call edges") {
  BuiltGraph bg = guiGraph(false);
  CHECK(bg.graph.nodeCount() == 12);
  CHECK(bg.graph.indirect.size() == 1);
  std::map<std::string, int> perObject;
  for (const auto& n : bg.graph.nodes) perObject[n.object]++;
  CHECK(perObject["U"] == 6);
  CHECK(perObject["I"] == 4);
  CHECK(perObject["S"] == 2);
  // the dotted edge is U's Put(start) -> resume?
  auto [a, b] = *bg.graph.indirect.begin();
  CHECK(bg.graph.nodes[a].object == "U");
  CHECK(bg.graph.nodes[a].kind == CNode::K::Put);
  CHECK(bg.graph.nodes[b].kind == CNode::K::Receive);
  CHECK(bg.graph.nodes[b].method == "resume");
  // three cross-object call edges
  int callEdges = 0;
  for (const auto& [x, y] : bg.graph.solid)
    if (bg.graph.nodes[x].object != bg.graph.nodes[y].object) ++callEdges;
  CHECK(callEdges == 3);
}

TEST_CASE("completed gui graph has the gray edge and is admissible") {
  BuiltGraph bg = guiGraph(true);
  REQUIRE(bg.graph.getEdges.size() == 1);
  auto [a, b] = *bg.graph.getEdges.begin();
  CHECK(bg.graph.nodes[a].object == "S");
  CHECK(bg.graph.nodes[a].kind == CNode::K::Put);
  CHECK(bg.graph.nodes[a].method == "cmp");
  CHECK(bg.graph.nodes[b].object == "U");
  CHECK(bg.graph.nodes[b].kind == CNode::K::Read);
  CHECK(admissible(bg.graph).ok);
}

TEST_CASE("single interaction protocol") {
  GlobalType g = parseGlobalType(
      "main -> A.m { post: top } A -> B.k { pre: top, post: top } end");
  BuiltGraph bg = buildPartialGraph(g);
  // A: m?, B!k, Put; B: k?, Put
  CHECK(bg.graph.nodeCount() == 5);
  int cross = 0;
  for (const auto& [x, y] : bg.graph.solid)
    if (bg.graph.nodes[x].object != bg.graph.nodes[y].object) ++cross;
  CHECK(cross == 1);
  CHECK(admissible(bg.graph).ok);
}

TEST_CASE("mutual-get construction is rejected with a cycle of length 4") {
  GlobalType g = parseGlobalType(R"(
main -> O.go(n) { post: top }
O -[x]-> A.m(pa) { pre: top, post: top }
O -[y]-> B.n(pb) { pre: top, post: top }
A reads pa
B reads pb
end
)");
  BuiltGraph bg = buildPartialGraph(g);
  std::map<std::string, std::vector<std::set<MethodRef>>> rr;
  rr["A"] = {{{"B", "n"}}};
  rr["B"] = {{{"A", "m"}}};
  addGetEdges(bg, rr);
  AdmissibilityReport rep = admissible(bg.graph);
  CHECK(!rep.ok);
  CHECK(rep.cycle.size() == 4);
}

TEST_CASE("an empty points-to set only warns") {
  BuiltGraph bg = guiGraph(false);
  std::map<std::string, std::vector<std::set<MethodRef>>> rr;
  rr["U"] = {std::set<MethodRef>{}};
  auto warns = addGetEdges(bg, rr);
  REQUIRE(warns.size() == 1);
  CHECK(warns[0].object == "U");
  CHECK(bg.graph.getEdges.empty());
}

TEST_CASE("receives connected only by a dotted edge violate the order check") {
  CausalityGraph g;
  auto add = [&](const std::string& obj, int ord, CNode::K kind, const std::string& m) {
    g.nodes.push_back(CNode{obj, ord, m, kind, m, {}});
    return (int)g.nodes.size() - 1;
  };
  int r1 = add("A", 0, CNode::K::Receive, "m1");
  int p1 = add("A", 1, CNode::K::Put, "m1");
  int r2 = add("A", 2, CNode::K::Receive, "m2");
  int p2 = add("A", 3, CNode::K::Put, "m2");
  g.solid.insert({r1, p1});
  g.indirect.insert({p1, r2});
  g.solid.insert({r2, p2});
  AdmissibilityReport rep = admissible(g);
  CHECK(!rep.ok);
  CHECK(rep.cycle.empty());
  REQUIRE(rep.unorderedReceives.size() == 1);
}

TEST_CASE("cycle detection agrees with brute-force path enumeration") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    CausalityGraph g;
    int n = 3 + (int)(rng() % 8);
    for (int i = 0; i < n; ++i)
      g.nodes.push_back(CNode{"X", i, "n", CNode::K::Send, "", {}});
    int edges = (int)(rng() % (2 * n));
    for (int e = 0; e < edges; ++e) {
      int a = (int)(rng() % n), b = (int)(rng() % n);
      if (a == b) continue;
      if (rng() % 4 == 0) g.indirect.insert({a, b});
      else g.solid.insert({a, b});
    }
    bool brute = bruteHasCycle(g);
    bool fast = !admissible(g).cycle.empty();
    CHECK(brute == fast);
  }
}

TEST_CASE("adding edges never repairs a cycle") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    CausalityGraph g;
    int n = 4 + (int)(rng() % 5);
    for (int i = 0; i < n; ++i)
      g.nodes.push_back(CNode{"X", i, "n", CNode::K::Send, "", {}});
    for (int e = 0; e < n; ++e) {
      int a = (int)(rng() % n), b = (int)(rng() % n);
      if (a != b) g.solid.insert({a, b});
    }
    if (admissible(g).cycle.empty()) continue;
    CausalityGraph g2 = g;
    g2.solid.insert({(int)(rng() % n), (int)((rng() + 1) % n)});
    CHECK(!admissible(g2).cycle.empty());
  }
}

TEST_CASE("dot export carries clusters and edge styles") {
  BuiltGraph bg = guiGraph(true);
  std::string dot = exportDot(bg.graph);
  CHECK(dot.find("subgraph cluster_0") != std::string::npos);
  CHECK(dot.find("style=dotted") != std::string::npos);
  CHECK(dot.find("color=gray") != std::string::npos);
  CHECK(dot.rfind("}\n") == dot.size() - 2);
  // export is verdict-agnostic: same output for the cyclic construction
  CausalityGraph cyc;
  cyc.nodes.push_back(CNode{"A", 0, "x", CNode::K::Send, "", {}});
  cyc.nodes.push_back(CNode{"A", 1, "y", CNode::K::Send, "", {}});
  cyc.solid.insert({0, 1});
  cyc.solid.insert({1, 0});
  CHECK(exportDot(cyc).find("digraph") == 0);
  // empty graph is a valid digraph
  CausalityGraph empty;
  CHECK(exportDot(empty).find("digraph") == 0);
}
