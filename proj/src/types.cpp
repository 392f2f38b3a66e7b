#include "asyncst/types.hpp"

namespace asyncst {

namespace {
template <class N>
GItemP makeG(N n, SrcLoc loc) {
  return std::make_shared<GItem>(GItem{std::move(n), loc});
}
template <class N>
LItemP makeL(N n) {
  return std::make_shared<LItem>(LItem{std::move(n)});
}
}  // namespace

GItemP mkGItem(GItem::Call n, SrcLoc loc) { return makeG(std::move(n), loc); }
GItemP mkGItem(GItem::Read n, SrcLoc loc) { return makeG(std::move(n), loc); }
GItemP mkGItem(GItem::Repeat n, SrcLoc loc) { return makeG(std::move(n), loc); }
GItemP mkGItem(GItem::Choice n, SrcLoc loc) { return makeG(std::move(n), loc); }
GItemP mkGItem(GItem::End n, SrcLoc loc) { return makeG(std::move(n), loc); }

LItemP mkLItem(LItem::Receive n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Send n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Put n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Read n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::SkipI n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Repeat n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Select n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::Offer n) { return makeL(std::move(n)); }
LItemP mkLItem(LItem::End n) { return makeL(std::move(n)); }

LBody normalizeBody(const LBody& body) {
  LBody out;
  for (const auto& it : body) {
    if (it->as<LItem::SkipI>()) continue;
    if (const auto* rp = it->as<LItem::Repeat>()) {
      LBody nb = normalizeBody(rp->body);
      if (nb.empty()) continue;  // a skip-only repetition is no obligation
      out.push_back(mkLItem(LItem::Repeat{std::move(nb), rp->invariant}));
      continue;
    }
    if (const auto* sel = it->as<LItem::Select>()) {
      LItem::Select s;
      for (const auto& br : sel->branches) s.branches.push_back(normalizeBody(br));
      out.push_back(mkLItem(std::move(s)));
      continue;
    }
    if (const auto* off = it->as<LItem::Offer>()) {
      LItem::Offer o;
      o.srcObject = off->srcObject;
      o.srcMethod = off->srcMethod;
      for (const auto& br : off->branches)
        o.branches.push_back(LItem::Offer::Branch{br.guard, normalizeBody(br.body)});
      out.push_back(mkLItem(std::move(o)));
      continue;
    }
    out.push_back(it);
  }
  return out;
}

LocalType normalizeLocal(const LocalType& t) {
  return LocalType{t.object, normalizeBody(t.items)};
}

namespace {

bool litemEqual(const LItemP& a, const LItemP& b) {
  if (a->node.index() != b->node.index()) return false;
  if (const auto* ra = a->as<LItem::Receive>()) {
    const auto* rb = b->as<LItem::Receive>();
    return ra->method == rb->method && alphaEqual(ra->pre, rb->pre);
  }
  if (const auto* sa = a->as<LItem::Send>()) {
    const auto* sb = b->as<LItem::Send>();
    return sa->callee == sb->callee && sa->method == sb->method && sa->loc == sb->loc &&
           alphaEqual(sa->pre, sb->pre);
  }
  if (const auto* pa = a->as<LItem::Put>())
    return alphaEqual(pa->post, b->as<LItem::Put>()->post);
  if (const auto* ra = a->as<LItem::Read>())
    return termEqual(ra->locExpr, b->as<LItem::Read>()->locExpr);
  if (a->as<LItem::SkipI>() || a->as<LItem::End>()) return true;
  if (const auto* ra = a->as<LItem::Repeat>()) {
    const auto* rb = b->as<LItem::Repeat>();
    return alphaEqual(ra->invariant, rb->invariant) && lbodyEqual(ra->body, rb->body);
  }
  if (const auto* sa = a->as<LItem::Select>()) {
    const auto* sb = b->as<LItem::Select>();
    if (sa->branches.size() != sb->branches.size()) return false;
    for (size_t i = 0; i < sa->branches.size(); ++i)
      if (!lbodyEqual(sa->branches[i], sb->branches[i])) return false;
    return true;
  }
  if (const auto* oa = a->as<LItem::Offer>()) {
    const auto* ob = b->as<LItem::Offer>();
    if (oa->srcObject != ob->srcObject || oa->srcMethod != ob->srcMethod ||
        oa->branches.size() != ob->branches.size())
      return false;
    for (size_t i = 0; i < oa->branches.size(); ++i) {
      if (!alphaEqual(oa->branches[i].guard, ob->branches[i].guard)) return false;
      if (!lbodyEqual(oa->branches[i].body, ob->branches[i].body)) return false;
    }
    return true;
  }
  return false;
}

}  // namespace

bool lbodyEqual(const LBody& a, const LBody& b) {
  LBody na = normalizeBody(a);
  LBody nb = normalizeBody(b);
  // Trailing End is optional in comparisons.
  auto stripEnd = [](LBody& v) {
    while (!v.empty() && v.back()->as<LItem::End>()) v.pop_back();
  };
  stripEnd(na);
  stripEnd(nb);
  if (na.size() != nb.size()) return false;
  for (size_t i = 0; i < na.size(); ++i)
    if (!litemEqual(na[i], nb[i])) return false;
  return true;
}

bool localEqual(const LocalType& a, const LocalType& b) {
  return lbodyEqual(a.items, b.items);
}

}  // namespace asyncst
