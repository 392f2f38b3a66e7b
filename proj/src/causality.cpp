#include "asyncst/causality.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "asyncst/projection.hpp"

namespace asyncst {

namespace {

// Mirrors the object-projection rules, producing nodes and edges instead of
// types. Kept structurally in sync with Projector (the tests cross-check
// node counts against the projected types).
struct GraphBuilder {
  const GlobalType& g;
  CausalityGraph graph;
  GraphIndex index;

  // Per-object chain state.
  struct Chain {
    int lastNode = -1;
    int ordinal = 0;
    std::vector<std::pair<int, int>> branchPath;  // (choice entry node, branch idx)
  };
  std::map<std::string, Chain> chains;
  std::map<std::string, std::string> activeMethod;  // ac restricted to method names

  int addNode(const std::string& obj, CNode::K kind, const std::string& describe,
              const std::string& method) {
    Chain& ch = chains[obj];
    CNode n;
    n.object = obj;
    n.ordinal = ch.ordinal++;
    n.kind = kind;
    n.describe = describe;
    n.method = method;
    n.branchPath = ch.branchPath;
    graph.nodes.push_back(n);
    int id = (int)graph.nodes.size() - 1;
    index.byOrdinal[{obj, n.ordinal}] = id;
    if (kind == CNode::K::Put && !method.empty())
      index.termNodes[{obj, method}].push_back(id);
    if (kind == CNode::K::Read) index.readNodes[obj].push_back(id);
    if (ch.lastNode >= 0) {
      bool dotted = graph.nodes[ch.lastNode].kind == CNode::K::Put &&
                    kind == CNode::K::Receive;
      if (dotted) graph.indirect.insert({ch.lastNode, id});
      else graph.solid.insert({ch.lastNode, id});
    }
    ch.lastNode = id;
    return id;
  }

  void walk(const GBody& items) {
    for (const auto& it : items) {
      if (const auto* c = it->as<GItem::Call>()) {
        int sendId = addNode(c->caller, CNode::K::Send, c->callee + "!" + c->method,
                             activeMethod.count(c->caller) ? activeMethod[c->caller] : "");
        if (activeMethod.count(c->callee)) {
          addNode(c->callee, CNode::K::Put, "Put", activeMethod[c->callee]);
        }
        int rcvId = addNode(c->callee, CNode::K::Receive, c->method + "?", c->method);
        graph.solid.insert({sendId, rcvId});
        activeMethod[c->callee] = c->method;
        continue;
      }
      if (const auto* r = it->as<GItem::Read>()) {
        addNode(r->object, CNode::K::Read,
                "Read", activeMethod.count(r->object) ? activeMethod[r->object] : "");
        continue;
      }
      if (const auto* rp = it->as<GItem::Repeat>()) {
        std::set<std::string> called;
        std::function<void(const GBody&)> collect = [&](const GBody& body) {
          for (const auto& bi : body) {
            if (const auto* bc = bi->as<GItem::Call>()) called.insert(bc->callee);
            else if (const auto* br = bi->as<GItem::Repeat>()) collect(br->body);
          }
        };
        collect(rp->body);
        // Objects called inside the block terminate inside each iteration;
        // their pending process closes before the loop (mirrors projection).
        for (const auto& y : called) {
          if (activeMethod.count(y)) {
            addNode(y, CNode::K::Put, "Put", activeMethod[y]);
            activeMethod.erase(y);
          }
        }
        size_t before = graph.nodes.size();
        walk(rp->body);
        for (const auto& y : called) {
          if (activeMethod.count(y)) {
            addNode(y, CNode::K::Put, "Put", activeMethod[y]);
            activeMethod.erase(y);
          }
        }
        size_t after = graph.nodes.size();
        if (after > before + 1) {
          graph.loopBack.insert({(int)after - 1, (int)before});  // wrap-around
        }
        continue;
      }
      if (const auto* ch = it->as<GItem::Choice>()) {
        walkChoice(*ch);
        return;
      }
      if (it->as<GItem::End>()) {
        for (auto& [obj, m] : activeMethod) {
          addNode(obj, CNode::K::Put, "Put", m);
        }
        activeMethod.clear();
        return;
      }
    }
  }

  void walkChoice(const GItem::Choice& ch) {
    // Entry/exit pseudo-nodes per object with branch content; branch chains
    // run in parallel between them.
    std::set<std::string> objs;
    objs.insert(ch.chooser);
    for (const auto& br : ch.branches)
      for (const auto& [o, f] : br.reacts) objs.insert(o);
    std::map<std::string, int> entries;
    for (const auto& o : objs)
      entries[o] = addNode(o, CNode::K::ChoiceEntry, "choice",
                           activeMethod.count(o) ? activeMethod[o] : "");
    auto savedChains = chains;
    auto savedActive = activeMethod;
    for (size_t b = 0; b < ch.branches.size(); ++b) {
      chains = savedChains;
      activeMethod = savedActive;
      for (auto& [o, chn] : chains) {
        auto eit = entries.find(o);
        if (eit != entries.end()) chn.lastNode = eit->second;
      }
      for (auto& [o, chn] : chains) chn.branchPath.push_back({-1, (int)b});
      walk(ch.branches[b].body);
    }
    chains = savedChains;
    activeMethod.clear();
  }

  BuiltGraph build() {
    activeMethod[g.head.callee] = g.head.method;
    addNode(g.head.callee, CNode::K::Receive, g.head.method + "?", g.head.method);
    walk(g.body);
    return BuiltGraph{std::move(graph), std::move(index)};
  }
};

}  // namespace

BuiltGraph buildPartialGraph(const GlobalType& g) {
  GraphBuilder b{g};
  return b.build();
}

std::vector<GetEdgeWarning> addGetEdges(
    BuiltGraph& bg,
    const std::map<std::string, std::vector<std::set<MethodRef>>>& readResolvers) {
  std::vector<GetEdgeWarning> warnings;
  for (const auto& [obj, resolverSets] : readResolvers) {
    auto rit = bg.index.readNodes.find(obj);
    const std::vector<int>& reads = rit == bg.index.readNodes.end() ? std::vector<int>{}
                                                                    : rit->second;
    for (size_t k = 0; k < resolverSets.size() && k < reads.size(); ++k) {
      if (resolverSets[k].empty()) {
        warnings.push_back(GetEdgeWarning{obj, (int)k});
        continue;
      }
      for (const auto& m : resolverSets[k]) {
        auto tit = bg.index.termNodes.find(m);
        if (tit == bg.index.termNodes.end()) continue;
        for (int put : tit->second) {
          bg.graph.solid.insert({put, reads[k]});
          bg.graph.getEdges.insert({put, reads[k]});
        }
      }
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Admissibility.
// ---------------------------------------------------------------------------
namespace {

std::vector<std::vector<int>> adjacency(const CausalityGraph& g, bool includeIndirect) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& [a, b] : g.solid) adj[a].push_back(b);
  if (includeIndirect)
    for (const auto& [a, b] : g.indirect) adj[a].push_back(b);
  return adj;
}

// DFS cycle detection; returns a cycle's node list if one exists.
std::vector<int> findCycle(const CausalityGraph& g) {
  auto adj = adjacency(g, true);
  std::vector<int> state(g.nodes.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<int> parent(g.nodes.size(), -1);
  std::vector<int> cycle;
  std::function<bool(int)> dfs = [&](int u) {
    state[u] = 1;
    for (int v : adj[u]) {
      if (state[v] == 1) {
        cycle.push_back(v);
        for (int x = u; x != v && x != -1; x = parent[x]) cycle.push_back(x);
        std::reverse(cycle.begin(), cycle.end());
        return true;
      }
      if (state[v] == 0) {
        parent[v] = u;
        if (dfs(v)) return true;
      }
    }
    state[u] = 2;
    return false;
  };
  for (int u = 0; u < (int)g.nodes.size(); ++u)
    if (state[u] == 0 && dfs(u)) return cycle;
  return {};
}

bool solidPath(const CausalityGraph& g, int from, int to) {
  auto adj = adjacency(g, false);
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<int> q{from};
  seen[from] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (u == to) return true;
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        q.push_back(v);
      }
    }
  }
  return false;
}

}  // namespace

AdmissibilityReport admissible(const CausalityGraph& g) {
  AdmissibilityReport rep;
  rep.cycle = findCycle(g);
  if (!rep.cycle.empty()) rep.ok = false;
  // Check 2: receives of one object must be solidly ordered, per the order
  // their nodes appear in the object type.
  std::map<std::string, std::vector<int>> receives;
  for (int i = 0; i < (int)g.nodes.size(); ++i)
    if (g.nodes[i].kind == CNode::K::Receive) receives[g.nodes[i].object].push_back(i);
  for (const auto& [obj, rs] : receives) {
    for (size_t a = 0; a < rs.size(); ++a) {
      for (size_t b = a + 1; b < rs.size(); ++b) {
        int r1 = rs[a], r2 = rs[b];
        if (g.nodes[r1].ordinal > g.nodes[r2].ordinal) std::swap(r1, r2);
        if (!solidPath(g, r1, r2)) {
          // Receives in parallel branches of a choice are exempt (no run
          // executes both).
          const auto& p1 = g.nodes[r1].branchPath;
          const auto& p2 = g.nodes[r2].branchPath;
          size_t common = 0;
          while (common < p1.size() && common < p2.size() && p1[common] == p2[common])
            ++common;
          bool parallel = common < p1.size() && common < p2.size();
          if (parallel) continue;
          rep.ok = false;
          rep.unorderedReceives.push_back({r1, r2});
        }
      }
    }
  }
  return rep;
}

std::string AdmissibilityReport::str(const CausalityGraph& g) const {
  if (ok) return "admissible";
  std::ostringstream os;
  if (!cycle.empty()) {
    os << "cycle of length " << cycle.size() << ":";
    for (int n : cycle) os << " " << g.nodes[n].object << ":" << g.nodes[n].describe;
  }
  for (const auto& [a, b] : unorderedReceives) {
    if (os.tellp() > 0) os << "; ";
    os << "no solid path between " << g.nodes[a].object << ":" << g.nodes[a].describe
       << " and " << g.nodes[b].object << ":" << g.nodes[b].describe;
  }
  return os.str();
}

std::string exportDot(const CausalityGraph& g) {
  std::ostringstream os;
  os << "digraph causality {\n  rankdir=LR;\n";
  std::map<std::string, std::vector<int>> byObj;
  for (int i = 0; i < (int)g.nodes.size(); ++i) byObj[g.nodes[i].object].push_back(i);
  int cluster = 0;
  for (const auto& [obj, ids] : byObj) {
    os << "  subgraph cluster_" << cluster++ << " {\n    label=\"" << obj << "\";\n";
    for (int i : ids)
      os << "    n" << i << " [label=\"" << g.nodes[i].describe << "\"];\n";
    os << "  }\n";
  }
  for (const auto& [a, b] : g.solid) {
    bool isGet = g.getEdges.count({a, b}) > 0;
    os << "  n" << a << " -> n" << b;
    if (isGet) os << " [color=gray, penwidth=2]";
    os << ";\n";
  }
  for (const auto& [a, b] : g.indirect)
    os << "  n" << a << " -> n" << b << " [style=dotted];\n";
  for (const auto& [a, b] : g.loopBack)
    os << "  n" << a << " -> n" << b << " [style=dashed, color=gray];\n";
  os << "}\n";
  return os.str();
}

}  // namespace asyncst
