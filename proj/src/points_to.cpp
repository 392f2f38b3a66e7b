#include <functional>

#include "asyncst/runtime.hpp"

namespace asyncst {

// Inclusion-based (Andersen-style) analysis over future-typed locations:
// call statements seed the target's set with the callee method, plain
// assignments copy sets, and a method's parameter receives the union of the
// argument sets over all syntactic call sites. Fetched values are not
// tracked (Fut<Fut<T>> is out of scope).
namespace {

struct Solver {
  const Program& prog;
  std::map<Location, std::set<MethodRef>> pts;
  std::vector<std::pair<Location, Location>> edges;  // to ⊇ from
  std::vector<std::pair<const void*, Location>> getSites;

  std::optional<Location> locationOf(const ExprP& e, const ObjectDecl& o,
                                     const MethodDecl& m) {
    if (const auto* v = e->as<Expr::VarRef>())
      return Location{Location::K::Local, o.name, m.name, v->name};
    if (const auto* f = e->as<Expr::FieldRef>())
      return Location{Location::K::Field, o.name, "", f->name};
    return std::nullopt;
  }

  void walkStmt(const StmtP& s, const ObjectDecl& o, const MethodDecl& m) {
    for (const StmtP& st : seqToList(s)) {
      if (const auto* c = st->as<Stmt::Call>()) {
        if (c->target) {
          Location t{c->fieldTarget ? Location::K::Field : Location::K::Local, o.name,
                     c->fieldTarget ? "" : m.name, *c->target};
          pts[t].insert(MethodRef{c->callee, c->method});
        }
        const MethodDecl* callee = prog.method(c->callee, c->method);
        if (callee) {
          for (size_t i = 0; i < c->args.size() && i < callee->params.size(); ++i) {
            auto from = locationOf(c->args[i], o, m);
            if (!from) continue;
            Location to{Location::K::Local, c->callee, callee->name,
                        callee->params[i].second};
            edges.emplace_back(to, *from);
          }
        }
      } else if (const auto* a = st->as<Stmt::Assign>()) {
        auto from = locationOf(a->expr, o, m);
        if (from) {
          Location to{a->fieldTarget ? Location::K::Field : Location::K::Local, o.name,
                      a->fieldTarget ? "" : m.name, a->target};
          edges.emplace_back(to, *from);
        }
      } else if (const auto* g = st->as<Stmt::Get>()) {
        auto loc = locationOf(g->fut, o, m);
        if (loc) getSites.emplace_back(static_cast<const void*>(g), *loc);
      } else if (const auto* i = st->as<Stmt::If>()) {
        walkStmt(i->thenS, o, m);
        walkStmt(i->elseS, o, m);
      } else if (const auto* w = st->as<Stmt::While>()) {
        walkStmt(w->body, o, m);
      }
    }
  }

  PointsTo solve() {
    for (const auto& o : prog.objects)
      for (const auto& m : o.methods) walkStmt(m.body, o, m);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [to, from] : edges) {
        auto fromIt = pts.find(from);
        if (fromIt == pts.end()) continue;
        auto& dst = pts[to];
        for (const auto& mr : fromIt->second) {
          if (dst.insert(mr).second) changed = true;
        }
      }
    }
    PointsTo out;
    out.atLocation = pts;
    for (const auto& [site, loc] : getSites) {
      auto it = pts.find(loc);
      out.atGet[site] = it == pts.end() ? std::set<MethodRef>{} : it->second;
    }
    return out;
  }
};

}  // namespace

PointsTo pointsToAnalysis(const Program& p) {
  Solver s{p, {}, {}, {}};
  return s.solve();
}

}  // namespace asyncst
