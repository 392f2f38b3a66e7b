#include "asyncst/value.hpp"

namespace asyncst {

std::string valueToString(const Value& v) {
  struct V {
    std::string operator()(Int n) const { return std::to_string(n); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const Unit&) const { return "unit"; }
    std::string operator()(const FutId& f) const { return "fut" + std::to_string(f.id); }
    std::string operator()(const ObjRef& o) const { return o.name; }
    std::string operator()(const ListVal& l) const {
      if (l.nil()) return "Nil";
      std::string s = "[";
      for (size_t i = 0; i < l.elems.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(l.elems[i]);
      }
      return s + "]";
    }
  };
  return std::visit(V{}, v);
}

std::string sortName(Sort s) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
    case Sort::UnitS: return "Unit";
    case Sort::Fut: return "Fut";
    case Sort::List: return "List";
    case Sort::Obj: return "Obj";
    case Sort::Unknown: return "?";
  }
  return "?";
}

Sort sortOfValue(const Value& v) {
  struct V {
    Sort operator()(Int) const { return Sort::Int; }
    Sort operator()(bool) const { return Sort::Bool; }
    Sort operator()(const Unit&) const { return Sort::UnitS; }
    Sort operator()(const FutId&) const { return Sort::Fut; }
    Sort operator()(const ObjRef&) const { return Sort::Obj; }
    Sort operator()(const ListVal&) const { return Sort::List; }
  };
  return std::visit(V{}, v);
}

}  // namespace asyncst
