#include <doctest.h>

#include <array>

#include "calculus_oracle.hpp"
#include "qsim/calculus.hpp"

using namespace qsim;

namespace {

struct Parts {
  std::vector<std::string> names;
  std::vector<int> converse;
  std::vector<RelationSet> composition;
  std::vector<std::pair<int, int>> edges;
};

Parts parts_of(const Calculus& c) {
  Parts p;
  p.names = c.relation_names();
  for (int r = 0; r < c.size(); ++r) p.converse.push_back(c.converse(r));
  for (int r = 0; r < c.size(); ++r)
    for (int s = 0; s < c.size(); ++s) p.composition.push_back(c.compose(r, s));
  for (auto [r, s] : c.neighbourhood_edges()) {
    p.edges.emplace_back(r, s);
    p.edges.emplace_back(s, r);
  }
  return p;
}

int rel(const Calculus& c, const char* name) { return *c.index_of(name); }

struct Rect {
  int x1, y1, x2, y2;
};

// RCC8 relation of two closed axis-parallel rectangles.
const char* rcc8(const Rect& a, const Rect& b) {
  const bool closed = a.x1 <= b.x2 && b.x1 <= a.x2 && a.y1 <= b.y2 && b.y1 <= a.y2;
  const bool open = a.x1 < b.x2 && b.x1 < a.x2 && a.y1 < b.y2 && b.y1 < a.y2;
  if (!closed) return "disjoint";
  if (!open) return "meet";
  const bool a_in_b = b.x1 <= a.x1 && a.x2 <= b.x2 && b.y1 <= a.y1 && a.y2 <= b.y2;
  const bool b_in_a = a.x1 <= b.x1 && b.x2 <= a.x2 && a.y1 <= b.y1 && b.y2 <= a.y2;
  if (a_in_b && b_in_a) return "equal";
  if (a_in_b) return b.x1 < a.x1 && a.x2 < b.x2 && b.y1 < a.y1 && a.y2 < b.y2 ? "inside" : "coveredby";
  if (b_in_a) return a.x1 < b.x1 && b.x2 < a.x2 && a.y1 < b.y1 && b.y2 < a.y2 ? "contains" : "covers";
  return "overlap";
}

}  // namespace

TEST_CASE("builtin calculi satisfy the axioms") {
  CHECK(validate(builtin_rcc8()).empty());
  CHECK(validate(builtin_cardinal()).empty());
  CHECK(builtin_rcc8().size() == 8);
  CHECK(builtin_cardinal().size() == 9);
}

TEST_CASE("a corrupted converse is reported with a witness") {
  Parts p = parts_of(builtin_rcc8());
  const int inside = rel(builtin_rcc8(), "inside");
  p.converse[inside] = inside;
  Calculus bad("bad", p.names, builtin_rcc8().identity(), p.converse, p.composition, p.edges);
  const auto v = validate(bad);
  REQUIRE_FALSE(v.empty());
  bool involution = false;
  for (const auto& x : v) involution |= x.axiom == "converse involution";
  CHECK(involution);
}

TEST_CASE("a broken identity row is reported") {
  Parts p = parts_of(builtin_rcc8());
  const Calculus& c = builtin_rcc8();
  p.composition[c.identity() * c.size() + rel(c, "meet")] = RelationSet::single(rel(c, "overlap"));
  Calculus bad("bad", p.names, c.identity(), p.converse, p.composition, p.edges);
  bool identity = false;
  for (const auto& x : validate(bad)) identity |= x.axiom == "identity law";
  CHECK(identity);
}

TEST_CASE("a one-way neighbourhood edge is reported") {
  Parts p = parts_of(builtin_rcc8());
  const Calculus& c = builtin_rcc8();
  p.edges.emplace_back(rel(c, "disjoint"), rel(c, "overlap"));
  Calculus bad("bad", p.names, c.identity(), p.converse, p.composition, p.edges);
  const auto v = validate(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].axiom == "neighbourhood symmetric");
}

TEST_CASE("an unmodified copy is valid and equal") {
  Parts p = parts_of(builtin_rcc8());
  Calculus copy(builtin_rcc8().name(), p.names, builtin_rcc8().identity(), p.converse, p.composition, p.edges);
  CHECK(validate(copy).empty());
  CHECK(copy == builtin_rcc8());
}

TEST_CASE("cardinal composition equals the point-grid oracle") {
  const Calculus& c = builtin_cardinal();
  const auto oracle = qsim::testing::cardinal_grid_table(c);
  for (int r = 0; r < c.size(); ++r)
    for (int s = 0; s < c.size(); ++s) {
      INFO(c.relation_name(r), " ; ", c.relation_name(s));
      CHECK(c.compose(r, s) == oracle[r * c.size() + s]);
    }
}

TEST_CASE("cardinal converse is the opposite direction") {
  const Calculus& c = builtin_cardinal();
  CHECK(c.converse(rel(c, "N")) == rel(c, "S"));
  CHECK(c.converse(rel(c, "NE")) == rel(c, "SW"));
  CHECK(c.converse(rel(c, "W")) == rel(c, "E"));
  CHECK(c.converse(rel(c, "samepoint")) == rel(c, "samepoint"));
}

TEST_CASE("RCC8 composition admits every rectangle configuration") {
  const Calculus& c = builtin_rcc8();
  std::vector<Rect> rects;
  for (int x1 = 0; x1 < 4; ++x1)
    for (int x2 = x1 + 1; x2 <= 4; ++x2)
      for (int y1 = 0; y1 < 4; ++y1)
        for (int y2 = y1 + 1; y2 <= 4; ++y2) rects.push_back({x1, y1, x2, y2});
  std::vector<RelationSet> seen(static_cast<std::size_t>(c.size()) * c.size());
  int unsound = 0;
  for (const Rect& a : rects)
    for (const Rect& b : rects) {
      const int ab = rel(c, rcc8(a, b));
      CHECK(c.converse(ab) == rel(c, rcc8(b, a)));
      for (const Rect& d : rects) {
        const int bd = rel(c, rcc8(b, d)), ad = rel(c, rcc8(a, d));
        seen[ab * c.size() + bd].insert(ad);
        unsound += !c.compose(ab, bd).contains(ad);
      }
    }
  CHECK(unsound == 0);
  // Rectangles realize most of the table; every realized cell is a subset.
  for (int r = 0; r < c.size(); ++r)
    for (int s = 0; s < c.size(); ++s) CHECK(seen[r * c.size() + s].subset_of(c.compose(r, s)));
}

TEST_CASE("RCC8 entries") {
  const Calculus& c = builtin_rcc8();
  auto set = [&](std::initializer_list<const char*> names) {
    RelationSet s;
    for (const char* n : names) s.insert(rel(c, n));
    return s;
  };
  CHECK(c.compose(rel(c, "inside"), rel(c, "inside")) == set({"inside"}));
  CHECK(c.compose(rel(c, "disjoint"), rel(c, "contains")) == set({"disjoint"}));
  CHECK(c.compose(rel(c, "meet"), rel(c, "meet")) == set({"disjoint", "meet", "equal", "covers", "coveredby", "overlap"}));
  CHECK(c.compose(rel(c, "disjoint"), rel(c, "disjoint")) == c.all());
  CHECK(c.adjacent(rel(c, "disjoint"), rel(c, "meet")));
  CHECK(c.adjacent(rel(c, "overlap"), rel(c, "equal")));
  CHECK_FALSE(c.adjacent(rel(c, "disjoint"), rel(c, "overlap")));
  CHECK(c.neighbourhood_edges().size() == 11);
}

TEST_CASE("serialize and load round-trip") {
  for (const Calculus* c : {&builtin_rcc8(), &builtin_cardinal()}) {
    const auto loaded = load_calculus(serialize(*c));
    CHECK(loaded.calculus == *c);
    CHECK(loaded.warnings.empty());
  }
}

TEST_CASE("builtins are found by name") {
  CHECK(find_builtin_calculus("rcc8") == &builtin_rcc8());
  CHECK(find_builtin_calculus("cardinal") == &builtin_cardinal());
  CHECK(find_builtin_calculus("octagon") == nullptr);
}

TEST_CASE("parse errors carry positions") {
  const std::string doc =
      "calculus tiny\n"
      "relations: a b\n"
      "identity: a\n"
      "converse:\n"
      "  a -> a\n"
      "  b -> c\n";
  try {
    load_calculus(doc);
    FAIL("expected a parse error");
  } catch (const CalculusParseError& e) {
    CHECK(e.line() == 6);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("incoherent tables are rejected on load") {
  // Composition a;b = {a} breaks the identity law for identity a.
  const std::string doc =
      "calculus tiny\n"
      "relations: a b\n"
      "identity: a\n"
      "converse:\n"
      "  a -> a\n"
      "  b -> b\n"
      "composition:\n"
      "  a ; a -> {a}\n"
      "  a ; b -> {a}\n"
      "  b ; a -> {b}\n"
      "  b ; b -> {a, b}\n";
  CHECK_THROWS_AS(load_calculus(doc), CalculusError);
}

TEST_CASE("RelationSet basics") {
  RelationSet s = RelationSet::single(3) | RelationSet::single(5);
  CHECK(s.size() == 2);
  CHECK(s.first() == 3);
  CHECK(s.members() == std::vector<int>{3, 5});
  s.erase(3);
  CHECK(s == RelationSet::single(5));
  CHECK(RelationSet::first_n(64).size() == 64);
}

TEST_CASE("cardinal entries") {
  const Calculus& c = builtin_cardinal();
  CHECK(c.compose(rel(c, "N"), rel(c, "N")) == RelationSet::single(rel(c, "N")));
  CHECK(c.compose(rel(c, "N"), rel(c, "S")) ==
        (RelationSet::single(rel(c, "N")) | RelationSet::single(rel(c, "S")) | RelationSet::single(rel(c, "samepoint"))));
  CHECK(builtin_rcc8().converse(rel(builtin_rcc8(), "inside")) == rel(builtin_rcc8(), "contains"));
  CHECK(builtin_rcc8().compose(builtin_rcc8().identity(), rel(builtin_rcc8(), "meet")) ==
        RelationSet::single(rel(builtin_rcc8(), "meet")));
}

TEST_CASE("a missing neighbourhood section gives the complete graph and a warning") {
  const std::string doc =
      "calculus tiny\n"
      "relations: a b c\n"
      "identity: a\n"
      "converse:\n"
      "  a -> a\n"
      "  b -> c\n"
      "  c -> b\n"
      "composition:\n"
      "  a ; a -> {a}\n"
      "  a ; b -> {b}\n"
      "  a ; c -> {c}\n"
      "  b ; a -> {b}\n"
      "  b ; b -> {b}\n"
      "  b ; c -> {a, b, c}\n"
      "  c ; a -> {c}\n"
      "  c ; b -> {a, b, c}\n"
      "  c ; c -> {c}\n";
  const auto loaded = load_calculus(doc);
  CHECK(loaded.warnings.size() == 1);
  CHECK(loaded.calculus.neighbourhood_edges().size() == 3);
  CHECK(validate(loaded.calculus).empty());
}

TEST_CASE("an unknown relation in a composition row is named") {
  const std::string doc =
      "calculus tiny\n"
      "relations: a\n"
      "identity: a\n"
      "converse:\n"
      "  a -> a\n"
      "composition:\n"
      "  a ; zz -> {a}\n";
  try {
    load_calculus(doc);
    FAIL("expected a parse error");
  } catch (const CalculusParseError& e) {
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
    CHECK(e.line() == 7);
  }
}
