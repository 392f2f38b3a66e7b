#ifndef ASYNCST_TYPES_HPP_
#define ASYNCST_TYPES_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "asyncst/formula.hpp"

namespace asyncst {

// ---------------------------------------------------------------------------
// Global types.
// ---------------------------------------------------------------------------
struct GItem;
using GItemP = std::shared_ptr<const GItem>;
using GBody = std::vector<GItemP>;

struct GItem {
  struct Call {
    std::string caller;
    std::optional<std::string> loc;  // -[x]-> annotation, caller-owned
    std::string callee;
    std::string method;
    std::vector<std::string> params;  // declared formal names of the callee
    FormulaP pre;
    FormulaP post;
  };
  struct Read {
    std::string object;
    TermP locExpr;
  };
  struct Repeat {
    GBody body;
    FormulaP invariant;
  };
  struct Choice {
    std::string chooser;
    struct Branch {
      FormulaP post;                                        // extra post of the chooser
      std::vector<std::pair<std::string, FormulaP>> reacts; // extra posts of active reactors
      GBody body;                                           // runs to End
    };
    std::vector<Branch> branches;
  };
  struct End {};

  std::variant<Call, Read, Repeat, Choice, End> node;
  SrcLoc loc;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

GItemP mkGItem(GItem::Call n, SrcLoc loc = {});
GItemP mkGItem(GItem::Read n, SrcLoc loc = {});
GItemP mkGItem(GItem::Repeat n, SrcLoc loc = {});
GItemP mkGItem(GItem::Choice n, SrcLoc loc = {});
GItemP mkGItem(GItem::End n, SrcLoc loc = {});

struct GlobalType {
  struct Head {
    std::string callee;
    std::string method;
    std::vector<std::string> params;
    FormulaP post;
  };
  Head head;
  GBody body;  // terminated by End (or a terminal Choice whose branches end)
  SrcLoc loc;

  std::set<std::string> roles() const;
};

// ---------------------------------------------------------------------------
// Local types. Object types and method types share this syntax.
// ---------------------------------------------------------------------------
struct LItem;
using LItemP = std::shared_ptr<const LItem>;
using LBody = std::vector<LItemP>;

struct LItem {
  struct Receive { std::string method; FormulaP pre; };
  struct Send {
    std::string callee;
    std::optional<std::string> loc;
    std::string method;
    std::vector<std::string> params;  // callee formals, for argument symbols
    FormulaP pre;
  };
  struct Put { FormulaP post; };
  struct Read { TermP locExpr; };
  struct SkipI {};
  struct Repeat { LBody body; FormulaP invariant; };
  struct Select { std::vector<LBody> branches; };
  struct Offer {
    std::string srcObject;
    std::string srcMethod;
    struct Branch { FormulaP guard; LBody body; };
    std::vector<Branch> branches;
  };
  struct End {};

  std::variant<Receive, Send, Put, Read, SkipI, Repeat, Select, Offer, End> node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

LItemP mkLItem(LItem::Receive n);
LItemP mkLItem(LItem::Send n);
LItemP mkLItem(LItem::Put n);
LItemP mkLItem(LItem::Read n);
LItemP mkLItem(LItem::SkipI n);
LItemP mkLItem(LItem::Repeat n);
LItemP mkLItem(LItem::Select n);
LItemP mkLItem(LItem::Offer n);
LItemP mkLItem(LItem::End n);

struct LocalType {
  std::string object;  // the endpoint this type was projected onto
  LBody items;

  bool empty() const { return items.empty(); }
};

// Skip.T == T : drops SkipI items (recursively) and trailing no-ops inside
// branches; the canonical form used for comparisons and output.
LocalType normalizeLocal(const LocalType& t);
LBody normalizeBody(const LBody& body);

// Structural equality modulo alpha-renaming of formulas, on normalized form.
bool localEqual(const LocalType& a, const LocalType& b);
bool lbodyEqual(const LBody& a, const LBody& b);

}  // namespace asyncst

#endif  // ASYNCST_TYPES_HPP_
