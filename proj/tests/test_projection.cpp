#include <doctest.h>

#include "asyncst/parse.hpp"
#include "asyncst/pretty.hpp"
#include "asyncst/projection.hpp"
#include "helpers.hpp"

using namespace asyncst;

namespace {

LocalType parseL(const std::string& s, const std::string& obj) { return parseLocalType(s, obj); }

}  // namespace

TEST_CASE("step 1: gui projection onto U") {
  GlobalType g = testing::corpusProto("gui.proto");
  LocalType u = projectOnObject(g, "U");
  LocalType expected = parseL(
      "start?<top>. I!cmp<top>. Put<self.state == self.expect>. "
      "resume?<exists Fut f. x == f>. Read<x>. Put<result > 0>. end",
      "U");
  CHECK(localEqual(u, expected));
}

TEST_CASE("step 2: propagation strengthens resume's precondition") {
  GlobalType g = testing::corpusProto("gui.proto");
  LocalType u = propagate(projectOnObject(g, "U"));
  LocalType expected = parseL(
      "start?<top>. I!cmp<top>. Put<self.state == self.expect>. "
      "resume?<exists Fut f. x == f && self.state == self.expect>. Read<x>. Put<result > 0>. end",
      "U");
  CHECK(localEqual(u, expected));
}

TEST_CASE("step 3: method projection splits at process boundaries") {
  GlobalType g = testing::corpusProto("gui.proto");
  LocalType u = propagate(projectOnObject(g, "U"));
  auto resume = projectOnMethod(u, "resume");
  REQUIRE(resume.size() == 1);
  CHECK(localEqual(resume[0],
                   parseL("resume?<exists Fut f. x == f && self.state == self.expect>. "
                          "Read<x>. Put<result > 0>",
                          "U")));
  auto start = projectOnMethod(u, "start");
  REQUIRE(start.size() == 1);
  CHECK(localEqual(start[0],
                   parseL("start?<top>. I!cmp<top>. Put<self.state == self.expect>", "U")));
}

TEST_CASE("uninvolved object projects to end") {
  GlobalType g = parseGlobalType("main -> A.m { post: top } end");
  LocalType b = projectOnObject(g, "B");
  CHECK(normalizeLocal(b).items.size() == 1);
  CHECK(normalizeLocal(b).items[0]->as<LItem::End>());
}

TEST_CASE("repetition: object and method types of Example 5") {
  GlobalType g = testing::corpusProto("repeat.proto");
  LocalType s = propagate(projectOnObject(g, "S"));
  CHECK(localEqual(
      s, parseL("comp?<top>. (U!up[x]<top>. Read<x>)*<exists List l. l != Nil>. Put<top>. end",
                "S")));
  auto comp = projectOnMethod(s, "comp");
  REQUIRE(comp.size() == 1);  // the repetition stays inside the enclosing method
  CHECK(comp[0].items.size() == 3);

  LocalType u = propagate(projectOnObject(g, "U"));
  auto up = projectOnMethod(u, "up");
  REQUIRE(up.size() == 1);
  CHECK(localEqual(
      up[0], parseL("up?<self.expect != Nil>. Put<self.expect != Nil>", "U")));
}

TEST_CASE("branching: the read moves in front of the passive choice") {
  GlobalType g = testing::corpusProto("branch.proto");
  LocalType c = propagate(projectOnObject(g, "C"));
  auto start = projectOnMethod(c, "start");
  REQUIRE(start.size() == 1);
  const LBody& items = start[0].items;
  REQUIRE(items.size() == 4);
  CHECK(items[1]->as<LItem::Send>());
  CHECK(items[2]->as<LItem::Read>());
  const auto* off = items[3]->as<LItem::Offer>();
  REQUIRE(off);
  CHECK(off->srcObject == "A");
  CHECK(off->srcMethod == "acc");
  REQUIRE(off->branches.size() == 2);
}

TEST_CASE("propagation is idempotent and monotone on the corpus") {
  for (const char* f : {"gui.proto", "repeat.proto", "branch.proto", "relay.proto",
                        "twostage.proto"}) {
    GlobalType g = testing::corpusProto(f);
    for (const auto& x : g.roles()) {
      LocalType once = propagate(projectOnObject(g, x));
      CHECK(localEqual(once, propagate(once)));
      // Precondition monotonicity: each propagated receive implies the
      // original one.
      LocalType raw = normalizeLocal(projectOnObject(g, x));
      std::function<void(const LBody&, const LBody&)> cmp = [&](const LBody& a, const LBody& b) {
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
          const auto* ra = a[i]->as<LItem::Receive>();
          const auto* rb = b[i]->as<LItem::Receive>();
          if (ra && rb) {
            CHECK(checkValidity(mkOr(mkNeg(rb->pre), ra->pre)).valid());
          }
          const auto* pa = a[i]->as<LItem::Repeat>();
          const auto* pb = b[i]->as<LItem::Repeat>();
          if (pa && pb) cmp(pa->body, pb->body);
        }
      };
      cmp(raw.items, once.items);
    }
  }
}

TEST_CASE("reassembly: method segments concatenate back to the object type") {
  // Holds for repetition- and branching-free protocols (loops are removed
  // from method types and passive-choice reads are hoisted).
  for (const char* f : {"gui.proto", "relay.proto", "twostage.proto"}) {
    GlobalType g = testing::corpusProto(f);
    for (const auto& x : g.roles()) {
      LocalType obj = propagate(projectOnObject(g, x));
      LBody concat;
      std::set<std::string> seen;
      for (const auto& m : methodsOf(obj)) seen.insert(m);
      // walk receive order
      std::map<std::string, std::vector<LocalType>> segs;
      std::map<std::string, size_t> cursor;
      for (const auto& m : seen) segs[m] = projectOnMethod(obj, m);
      for (const auto& it : normalizeLocal(obj).items) {
        if (const auto* r = it->as<LItem::Receive>()) {
          auto& c = cursor[r->method];
          REQUIRE(c < segs[r->method].size());
          for (const auto& x2 : segs[r->method][c].items) concat.push_back(x2);
          ++c;
        }
      }
      LBody objItems = normalizeLocal(obj).items;
      while (!objItems.empty() && objItems.back()->as<LItem::End>()) objItems.pop_back();
      CHECK(lbodyEqual(concat, objItems));
    }
  }
}

TEST_CASE("projection totality on the corpus") {
  for (const char* f : {"gui.proto", "repeat.proto", "branch.proto", "relay.proto",
                        "twostage.proto"}) {
    GlobalType g = testing::corpusProto(f);
    CHECK(wellFormed(g).ok);
  }
}

TEST_CASE("cs admits conjunctions of locals and rejects cross-heap ties") {
  SymbolScope sc;
  CHECK(csCheck(parseFormula("G.i == 1 && S.i == 1", sc)));
  CHECK(!csCheck(parseFormula("G.i == S.i", sc)));
  CHECK(csCheck(mkTop()));
}

TEST_CASE("inactive caller is a projection error") {
  GlobalType g = parseGlobalType(testing::readCorpus("mutants/gui_inactive.proto"));
  CHECK_THROWS_AS(projectOnObject(g, "I"), ProjectionUndefined);
  WfReport rep = wellFormed(g);
  CHECK(!rep.ok);
  bool rule1 = false;
  for (const auto& d : rep.issues) rule1 = rule1 || d.rule == "projection rule 1";
  CHECK(rule1);
}

TEST_CASE("overlapping method-type preconditions are rejected") {
  GlobalType g = parseGlobalType(testing::readCorpus("mutants/gui_overlap.proto"));
  WfReport rep = wellFormed(g);
  CHECK(!rep.ok);
  bool overlap = false;
  for (const auto& d : rep.issues)
    overlap = overlap || d.message.find("overlapping") != std::string::npos;
  CHECK(overlap);
}

TEST_CASE("Post(G) collects heap-state parts of all postconditions") {
  GlobalType g = testing::corpusProto("gui.proto");
  FormulaP post = postConjunction(g);
  // contains the main call's heap fact
  SymbolScope sc;
  FormulaP fact = parseFormula("U.state == U.expect", sc);
  bool found = false;
  std::function<void(const FormulaP&)> scan = [&](const FormulaP& f) {
    if (alphaEqual(f, fact)) found = true;
    if (const auto* n = f->as<Formula::And>()) {
      scan(n->l);
      scan(n->r);
    }
  };
  scan(post);
  CHECK(found);
}
