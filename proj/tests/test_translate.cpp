#include <doctest.h>

#include <set>

#include "oracle_suite.hpp"
#include "qsim/translate.hpp"

using namespace qsim;
using namespace qsim::translate;
using csp::ConstraintKind;
using temporal::Direction;

namespace {

struct Setup {
  csp::Store store;
  StageSpace space;
  temporal::Vocabulary vocab;

  Setup(std::vector<std::string> objects, const Calculus& c, int horizon)
      : space(int(objects.size()), horizon), vocab{std::move(objects), &c, {}} {
    const int n = int(vocab.objects.size());
    for (int t = 0; t < horizon; ++t)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) space.set(a, b, t, store.new_var(csp::Domain::relations(c.all().bits())));
  }

  temporal::FormulaPtr formula(const char* text) const { return temporal::desugar(temporal::parse_formula(text), vocab); }
  temporal::InterStateRule rule(const char* text) const {
    auto r = temporal::parse_rule(text);
    r.past = temporal::desugar(r.past, vocab);
    r.future = temporal::desugar(r.future, vocab);
    return r;
  }
  csp::VarId q(int a, int b, int t) const { return space.at(a, b, t); }
  int rel(const char* name) const { return *vocab.calculus->index_of(name); }
};

std::size_t le_without_b(const csp::Store& s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.num_constraints(); ++i)
    if (auto* k = std::get_if<csp::ReifiedIntCompare>(&s.constraint(i)))
      n += k->op == csp::CompareOp::Le && !k->b;
  return n;
}

const char* kNested = "F (Q[ship,buoy_a] = W & F Q[ship,buoy_b] = N)";

}  // namespace

TEST_CASE("unfolding and array translation agree with eval (depth <= 2)") {
  const auto r = qsim::testing::oracle_equivalence(2, 4);
  INFO(r.first);
  CHECK(r.formulas == 126);
  CHECK(r.checks > 50000);
  CHECK(r.discrepancies == 0);
}

TEST_CASE("eventually over [1..3] unfolds into three reified equalities") {
  Setup s({"A", "B"}, qsim::testing::two_relation_calculus(), 4);
  Translator tr(s.store, s.space);
  const auto res = tr.unfold(s.formula("F Q[A,B] = same"), Direction::Future, 1, 3);
  CHECK(s.store.count(ConstraintKind::ReifiedValueEq) == 3);
  CHECK(s.store.count(ConstraintKind::BoolEquiv) == 1);
  CHECK(res.posted.size() == 4);
  const auto& gate = std::get<csp::BoolEquiv>(s.store.constraint(res.posted.back()));
  CHECK(gate.gate == csp::Gate::Or);
  CHECK(gate.inputs.size() == 3);
  CHECK(gate.output == res.truth);
}

TEST_CASE("nested eventually: n(n+3)/2 reified equalities unfolded, two element constraints in array mode") {
  const std::vector<std::string> objects = {"ship", "buoy_a", "buoy_b", "buoy_c"};
  for (int n = 1; n <= 10; ++n) {
    INFO("n = ", n);
    Setup u(objects, builtin_cardinal(), n + 1);
    Translator tu(u.store, u.space);
    tu.set_memo(false);
    tu.unfold(u.formula(kNested), Direction::Future, 1, n);
    CHECK(u.store.count(ConstraintKind::ReifiedValueEq) == std::size_t(n * (n + 3) / 2));

    Setup a(objects, builtin_cardinal(), n + 1);
    Translator ta(a.store, a.space);
    ta.array(temporal::nnf(a.formula(kNested)), Direction::Future, 1, n);
    CHECK(a.store.count(ConstraintKind::ArrayElement) == 2);
    CHECK(a.store.count(ConstraintKind::ReifiedValueEq) == 0);
    CHECK(le_without_b(a.store) == 4);
  }
  // Memoization shares the inner atoms across start positions.
  Setup m(objects, builtin_cardinal(), 11);
  Translator tm(m.store, m.space);
  tm.unfold(m.formula(kNested), Direction::Future, 1, 10);
  CHECK(m.store.count(ConstraintKind::ReifiedValueEq) == 20);
}

TEST_CASE("an atom at a ground time is a reified equality in array mode") {
  Setup s({"A", "B"}, qsim::testing::two_relation_calculus(), 3);
  Translator tr(s.store, s.space);
  tr.array(s.formula("Q[A,B] = apart"), Direction::Future, 1, 2);
  CHECK(s.store.count(ConstraintKind::ReifiedValueEq) == 1);
  CHECK(s.store.count(ConstraintKind::ArrayElement) == 0);
}

TEST_CASE("strong next on a single point is false") {
  for (Mode mode : {Mode::Unfold, Mode::Array}) {
    Setup s({"A", "B"}, qsim::testing::two_relation_calculus(), 3);
    Translator tr(s.store, s.space);
    const auto b = tr.translate(s.formula("X Q[A,B] = same"), Direction::Future, 2, 2, mode).truth;
    REQUIRE(s.store.propagate() == csp::Outcome::Consistent);
    CHECK(s.store.fixed(b));
    CHECK(s.store.value(b) == 0);
  }
}

TEST_CASE("rules") {
  for (Mode mode : {Mode::Unfold, Mode::Array}) {
    INFO("mode ", std::string(mode == Mode::Unfold ? "unfold" : "array"));
    SUBCASE("first phagocytosis rule forces the next stage") {
      Setup s({"nutrient", "amoeba"}, builtin_rcc8(), 2);
      Translator tr(s.store, s.space);
      tr.post_rule(s.rule("Q[nutrient,amoeba] = meet => Q[nutrient,amoeba] = overlap"), 0, mode);
      s.store.assign(s.q(0, 1, 0), s.rel("meet"));
      REQUIRE(s.store.propagate() == csp::Outcome::Consistent);
      CHECK(s.store.values(s.q(0, 1, 1)) == std::vector<int>{s.rel("overlap")});
    }
    SUBCASE("an invariant holds at every later stage") {
      Setup s({"A", "B"}, builtin_rcc8(), 4);
      Translator tr(s.store, s.space);
      tr.post_rule(s.rule("Q[A,B] = inside => G Q[A,B] = inside"), 0, mode);
      s.store.assign(s.q(0, 1, 0), s.rel("inside"));
      REQUIRE(s.store.propagate() == csp::Outcome::Consistent);
      for (int t = 1; t < 4; ++t) CHECK(s.store.values(s.q(0, 1, t)) == std::vector<int>{s.rel("inside")});
    }
    SUBCASE("a disjunctive invariant holds in every solution") {
      Setup s({"A", "B"}, builtin_rcc8(), 3);
      Translator tr(s.store, s.space);
      tr.post_rule(s.rule("Q[A,B] in {inside, coveredby} => G Q[A,B] in {inside, coveredby}"), 0, mode);
      s.store.assign(s.q(0, 1, 0), s.rel("inside"));
      const std::vector<csp::VarId> proj = {s.q(0, 1, 1), s.q(0, 1, 2)};
      const auto all = csp::solve_all(s.store, csp::Branching{}, 100, proj);
      CHECK(all.solutions.size() == 4);
      for (const auto& sol : all.solutions)
        for (csp::VarId v : proj) CHECK((sol[v] == s.rel("inside") || sol[v] == s.rel("coveredby")));
    }
    SUBCASE("a false premise prunes nothing") {
      Setup s({"A", "B"}, builtin_rcc8(), 3);
      Translator tr(s.store, s.space);
      tr.post_rule(s.rule("Q[A,B] = meet => Q[A,B] = overlap"), 0, mode);
      s.store.assign(s.q(0, 1, 0), s.rel("disjoint"));
      REQUIRE(s.store.propagate() == csp::Outcome::Consistent);
      for (int t = 1; t < 3; ++t) CHECK(s.store.size(s.q(0, 1, t)) == 8);
    }
    SUBCASE("the past side reads the whole prefix") {
      Setup s({"A", "B"}, builtin_rcc8(), 3);
      Translator tr(s.store, s.space);
      tr.post_rule(s.rule("Fp Q[A,B] = meet => Q[A,B] = disjoint"), 1, mode);
      s.store.assign(s.q(0, 1, 0), s.rel("meet"));
      s.store.assign(s.q(0, 1, 1), s.rel("overlap"));
      REQUIRE(s.store.propagate() == csp::Outcome::Consistent);
      CHECK(s.store.values(s.q(0, 1, 2)) == std::vector<int>{s.rel("disjoint")});
    }
  }
}

TEST_CASE("translation errors") {
  Setup s({"A", "B"}, qsim::testing::two_relation_calculus(), 3);
  Translator tr(s.store, s.space);
  const auto rule = s.rule("Q[A,B] = same => Q[A,B] = apart");
  CHECK_THROWS_AS(tr.post_rule(rule, 2, Mode::Unfold), TranslationError);
  CHECK_THROWS_AS(tr.post_rule(rule, -1, Mode::Array), TranslationError);
  CHECK_THROWS_AS(tr.unfold(s.formula("X true"), Direction::Future, 0, 3), TranslationError);
  CHECK_THROWS_AS(tr.unfold(s.formula("Xp true"), Direction::Future, 0, 2), TranslationError);
  CHECK_THROWS_AS(tr.array(s.formula("!F Q[A,B] = same"), Direction::Future, 0, 2), TranslationError);
  CHECK_THROWS_AS(tr.unfold(temporal::parse_formula("Q[A,B] in {same}"), Direction::Future, 0, 2), TranslationError);
}

TEST_CASE("required formulas have the same models in both modes") {
  using qsim::testing::formulas;
  const Calculus& c = qsim::testing::two_relation_calculus();
  auto eq_table = std::make_shared<std::vector<std::uint64_t>>(std::vector<std::uint64_t>{0b01, 0b10});
  for (Direction dir : {Direction::Future, Direction::Past}) {
    const auto fs = formulas(dir, 2);
    for (std::size_t i = 0; i < fs.size(); i += 3) {
      for (int len = 1; len <= 4; ++len) {
        std::set<std::vector<int>> models[2];
        for (Mode mode : {Mode::Unfold, Mode::Array}) {
          Setup s({"A", "B"}, c, len);
          for (int t = 0; t < len; ++t) {
            s.store.assign(s.q(0, 0, t), c.identity());
            s.store.assign(s.q(1, 1, t), c.identity());
            s.store.post(csp::ExtensionalBinary{s.q(0, 1, t), s.q(1, 0, t), eq_table});
          }
          Translator tr(s.store, s.space);
          tr.require(fs[i], dir, 0, len - 1, mode);
          std::vector<csp::VarId> proj;
          for (int t = 0; t < len; ++t) proj.push_back(s.q(0, 1, t));
          const auto all = csp::solve_all(s.store, csp::Branching{}, 100, proj);
          for (const auto& sol : all.solutions) {
            std::vector<int> row;
            for (csp::VarId v : proj) row.push_back(sol[v]);
            models[mode == Mode::Array].insert(row);
          }
        }
        std::set<std::vector<int>> expected;
        qsim::testing::for_each_trace(len, [&](const temporal::Trace& tr) {
          if (!temporal::eval(*fs[i], tr, 0, len - 1, dir)) return;
          std::vector<int> row;
          for (int t = 0; t < len; ++t) row.push_back(tr.at(0, 1, t));
          expected.insert(row);
        });
        INFO(fs[i]->key, " length ", len);
        CHECK(models[0] == expected);
        CHECK(models[1] == expected);
      }
    }
  }
}
