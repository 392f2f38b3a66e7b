#ifndef ASYNCST_VALUE_HPP_
#define ASYNCST_VALUE_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace asyncst {

using Int = long long;

struct Unit {
  bool operator==(const Unit&) const = default;
};

// Write-once handle identity; ids are opaque but ordered for reproducibility.
struct FutId {
  int id = -1;
  bool operator==(const FutId&) const = default;
  auto operator<=>(const FutId&) const = default;
};

struct ObjRef {
  std::string name;
  bool operator==(const ObjRef&) const = default;
};

// Lists carry their elements but formulas only distinguish Nil from non-Nil.
// Nil is the empty list.
struct ListVal {
  std::vector<Int> elems;
  bool nil() const { return elems.empty(); }
  bool operator==(const ListVal&) const = default;
};

using Value = std::variant<Int, bool, Unit, FutId, ObjRef, ListVal>;

inline bool valueEq(const Value& a, const Value& b) { return a == b; }

std::string valueToString(const Value& v);

enum class Sort { Int, Bool, UnitS, Fut, List, Obj, Unknown };

std::string sortName(Sort s);
Sort sortOfValue(const Value& v);

}  // namespace asyncst

#endif  // ASYNCST_VALUE_HPP_
