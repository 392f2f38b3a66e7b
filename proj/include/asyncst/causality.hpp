#ifndef ASYNCST_CAUSALITY_HPP_
#define ASYNCST_CAUSALITY_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "asyncst/runtime.hpp"
#include "asyncst/types.hpp"

namespace asyncst {

// Nodes are the items of the projected object types; identity includes the
// ordinal so duplicate items stay distinct.
struct CNode {
  std::string object;
  int ordinal = 0;
  std::string describe;  // "U?start", "U!cmp", "Put", "Read(x)"
  enum class K { Receive, Send, Put, Read, ChoiceEntry, ChoiceExit } kind = K::Receive;
  std::string method;  // receive: the started method; put: the owning method
  std::vector<std::pair<int, int>> branchPath;  // (choice entry node, branch index)

  auto operator<=>(const CNode&) const = default;
};

struct CausalityGraph {
  std::vector<CNode> nodes;
  std::set<std::pair<int, int>> solid;     // direct causality
  std::set<std::pair<int, int>> indirect;  // dotted Put -> Receive edges
  std::set<std::pair<int, int>> getEdges;  // Points-To-added subset of solid
  // Iteration wrap-around edges of repetition blocks: dependency information
  // for rendering, excluded from both admissibility checks (a literal
  // back-edge makes every loop body cyclic).
  std::set<std::pair<int, int>> loopBack;

  int nodeCount() const { return (int)nodes.size(); }
};

// Node lookup handles used when completing the graph from the type checker.
struct GraphIndex {
  // (object, item ordinal within the object's normalized type) -> node id
  std::map<std::pair<std::string, int>, int> byOrdinal;
  // Put nodes per method: term(m).
  std::map<MethodRef, std::vector<int>> termNodes;
  // Read nodes per object, in type order.
  std::map<std::string, std::vector<int>> readNodes;
};

struct BuiltGraph {
  CausalityGraph graph;
  GraphIndex index;
};

// Nodes + sequencing edges + call edges from the global type; Put->Receive
// adjacencies become indirect edges. No get edges yet.
BuiltGraph buildPartialGraph(const GlobalType& g);

// Adds the Points-To edges: from every possibly-resolving method's Put nodes
// to the Read node. `readResolvers[X][k]` is p2 for the k-th Read of X.
struct GetEdgeWarning {
  std::string object;
  int readIndex;
};
std::vector<GetEdgeWarning> addGetEdges(
    BuiltGraph& bg, const std::map<std::string, std::vector<std::set<MethodRef>>>& readResolvers);

struct AdmissibilityReport {
  bool ok = true;
  std::vector<int> cycle;  // node ids of a found cycle
  std::vector<std::pair<int, int>> unorderedReceives;
  std::string str(const CausalityGraph& g) const;
};

// (1) no cycle in solid+indirect; (2) for every object and every ordered
// pair of its receive nodes, a solid-only connecting path.
AdmissibilityReport admissible(const CausalityGraph& g);

std::string exportDot(const CausalityGraph& g);

}  // namespace asyncst

#endif  // ASYNCST_CAUSALITY_HPP_
