#include <doctest.h>

#include "qsim/temporal.hpp"
#include "support.hpp"

using namespace qsim;
using namespace qsim::temporal;
using qsim::testing::for_each_trace;
using qsim::testing::formulas;
using qsim::testing::two_object_vocabulary;

namespace {

// Bounded semantics written with explicit quantifiers over the interval.
bool oracle(const Formula& f, const Trace& tr, int s, int t, Direction dir) {
  auto any = [](int lo, int hi, auto&& p) {
    for (int k = lo; k <= hi; ++k)
      if (p(k)) return true;
    return false;
  };
  auto all = [&](int lo, int hi, auto&& p) { return !any(lo, hi, [&](int k) { return !p(k); }); };
  const auto& k = f.kids;
  switch (f.op) {
    case Op::True: return true;
    case Op::Atom: {
      const int at = dir == Direction::Past ? t : s;
      return (tr.at(f.obj_a, f.obj_b, at) == f.relation) == f.positive;
    }
    case Op::Not: return !oracle(*k[0], tr, s, t, dir);
    case Op::And: return all(0, int(k.size()) - 1, [&](int i) { return oracle(*k[i], tr, s, t, dir); });
    case Op::Or: return any(0, int(k.size()) - 1, [&](int i) { return oracle(*k[i], tr, s, t, dir); });
    case Op::Implies: return !oracle(*k[0], tr, s, t, dir) || oracle(*k[1], tr, s, t, dir);
    case Op::Next: return s < t && oracle(*k[0], tr, s + 1, t, dir);
    case Op::WeakNext: return s == t || oracle(*k[0], tr, s + 1, t, dir);
    case Op::Always: return all(s, t, [&](int r) { return oracle(*k[0], tr, r, t, dir); });
    case Op::Eventually: return any(s, t, [&](int r) { return oracle(*k[0], tr, r, t, dir); });
    case Op::Until:
      return any(s, t, [&](int r) {
        return oracle(*k[1], tr, r, t, dir) && all(s, r - 1, [&](int q) { return oracle(*k[0], tr, q, t, dir); });
      });
    case Op::Release:
      return all(s, t, [&](int r) {
        return oracle(*k[1], tr, r, t, dir) || any(s, r - 1, [&](int q) { return oracle(*k[0], tr, q, t, dir); });
      });
    case Op::Prev: return s < t && oracle(*k[0], tr, s, t - 1, dir);
    case Op::WeakPrev: return s == t || oracle(*k[0], tr, s, t - 1, dir);
    case Op::AlwaysPast: return all(s, t, [&](int r) { return oracle(*k[0], tr, s, r, dir); });
    case Op::EventuallyPast: return any(s, t, [&](int r) { return oracle(*k[0], tr, s, r, dir); });
    case Op::Since:
      return any(s, t, [&](int r) {
        return oracle(*k[1], tr, s, r, dir) && all(r + 1, t, [&](int q) { return oracle(*k[0], tr, s, q, dir); });
      });
    case Op::Trigger:
      return all(s, t, [&](int r) {
        return oracle(*k[1], tr, s, r, dir) || any(r + 1, t, [&](int q) { return oracle(*k[0], tr, s, q, dir); });
      });
    default: throw std::logic_error("oracle: unexpected operator");
  }
}

FormulaPtr desugared(const char* text) { return desugar(parse_formula(text), two_object_vocabulary()); }

Trace single_pair_trace(std::initializer_list<int> rels) {
  Trace tr(2, int(rels.size()));
  int t = 0;
  for (int r : rels) {
    tr.at(0, 0, t) = tr.at(1, 1, t) = 0;
    tr.at(0, 1, t) = tr.at(1, 0, t) = r;
    ++t;
  }
  return tr;
}

}  // namespace

TEST_CASE("atoms and nested eventually parse") {
  const auto a = parse_formula("Q[ship,buoy_c] = S");
  CHECK(a->op == Op::Atom);
  CHECK(a->a == "ship");
  CHECK(a->b == "buoy_c");
  CHECK(a->relation_names == std::vector<std::string>{"S"});
  CHECK(a->positive);

  const auto g = parse_formula("F (Q[s,b_a] = W & F (Q[s,b_b] = N))");
  REQUIRE(g->op == Op::Eventually);
  REQUIRE(g->kids[0]->op == Op::And);
  CHECK(g->kids[0]->kids[1]->op == Op::Eventually);
  CHECK(depth(*g) == 4);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_formula("true | true & false")->op == Op::Or);
  CHECK(parse_formula("!true & true")->op == Op::And);
  const auto u = parse_formula("true U true U false");
  REQUIRE(u->op == Op::Until);
  CHECK(u->kids[1]->op == Op::Until);
  CHECK(parse_formula("true U true & false")->op == Op::And);
  CHECK(parse_formula("true -> false -> true")->kids[1]->op == Op::Implies);
  // An operator keyword used as an object name.
  CHECK(parse_formula("X == F")->op == Op::SameObject);
}

TEST_CASE("printing round-trips through the parser") {
  for (Direction dir : {Direction::Future, Direction::Past}) {
    int checked = 0;
    for (const auto& f : formulas(dir, 3)) {
      const auto back = parse_formula(f->key);
      // Resolved leaves print their names, so the reparsed atoms carry names only.
      CHECK(back->key == f->key);
      ++checked;
    }
    CHECK(checked > 10000);
  }
  for (const char* text : {"Q[A,B] in {inside, coveredby}", "forall x, y in objects: x != y -> Q[x,y] != equal",
                           "exists s in {B, C}: Q[A,s] notin {meet}", "ite(Q[A,B] = a, X Q[A,B] = b, WX false)"}) {
    const auto f = parse_formula(text);
    CHECK(parse_formula(f->key)->key == f->key);
  }
}

TEST_CASE("parse errors") {
  try {
    parse_formula("Q[A,B] = meet & ?");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 17);
  }
  CHECK_THROWS_AS(parse_formula("Q[A,B] meet"), ParseError);
  CHECK_THROWS_AS(parse_formula("(true"), ParseError);
  CHECK_THROWS_AS(parse_formula("true true"), ParseError);
  CHECK_THROWS_AS(parse_rule("F Q[A,B] = x => true"), ParseError);
  CHECK_THROWS_AS(parse_rule("true => Fp Q[A,B] = x"), ParseError);
  CHECK_THROWS_AS(parse_rule("true"), ParseError);
  const auto r = parse_rule("Q[N,A] = meet => X Q[N,A] = overlap");
  CHECK(r.past->op == Op::Atom);
  CHECK(r.future->op == Op::Next);
}

TEST_CASE("desugaring") {
  Vocabulary v{{"A", "B", "C"}, &builtin_rcc8(), {{"others", {"B", "C"}}}};
  const int inside = *builtin_rcc8().index_of("inside");

  const auto m = desugar(parse_formula("Q[A,B] in {inside, coveredby}"), v);
  REQUIRE(m->op == Op::Or);
  CHECK(m->kids.size() == 2);
  CHECK(m->kids[0]->resolved_atom());
  CHECK(m->kids[0]->relation == inside);

  const auto n = desugar(parse_formula("Q[A,B] notin {inside, coveredby}"), v);
  REQUIRE(n->op == Op::And);
  CHECK_FALSE(n->kids[0]->positive);

  const auto q = desugar(parse_formula("forall s in {B, C}: Q[A,s] = meet"), v);
  REQUIRE(q->op == Op::And);
  CHECK(q->kids[0]->obj_b == 1);
  CHECK(q->kids[1]->obj_b == 2);
  CHECK(desugar(parse_formula("exists s in others: Q[A,s] = meet"), v)->op == Op::Or);

  const auto all = desugar(parse_formula("forall x, y in objects: x != y -> Q[x,y] != equal"), v);
  CHECK(all->kids.size() == 9);

  const auto ite = desugar(parse_formula("ite(Q[A,B] = meet, Q[A,C] = meet, Q[B,C] = meet)"), v);
  REQUIRE(ite->op == Op::And);
  CHECK(ite->kids[0]->op == Op::Implies);
  CHECK(ite->kids[1]->op == Op::Implies);
  CHECK(ite->kids[1]->kids[0]->op == Op::Not);

  CHECK(desugar(parse_formula("A == A"), v)->op == Op::True);
  CHECK(desugar(parse_formula("A == B"), v)->key == "false");
  CHECK_THROWS_AS(desugar(parse_formula("Q[A,D] = meet"), v), DesugarError);
  CHECK_THROWS_AS(desugar(parse_formula("Q[A,B] = north"), v), DesugarError);
  CHECK_THROWS_AS(desugar(parse_formula("forall s in nowhere: true"), v), DesugarError);
}

TEST_CASE("negation normal form shapes") {
  const auto a = nnf(desugared("!(Q[A,B] = same)"));
  CHECK(a->op == Op::Atom);
  CHECK_FALSE(a->positive);
  const auto g = nnf(desugared("!F Q[A,B] = same"));
  REQUIRE(g->op == Op::Always);
  CHECK_FALSE(g->kids[0]->positive);
  CHECK(nnf(desugared("!X true"))->key == "WX false");
  CHECK(nnf(desugared("!(Q[A,B] = same U Q[A,B] = apart)"))->op == Op::Release);
  CHECK(nnf(desugared("!(Q[A,B] = same S Q[A,B] = apart)"))->op == Op::Trigger);
  CHECK_THROWS_AS(nnf(parse_formula("Q[A,B] in {same}")), std::invalid_argument);
}

TEST_CASE("evaluator matches the quantifier semantics; nnf and mirror preserve truth") {
  for (Direction dir : {Direction::Future, Direction::Past}) {
    const auto fs = formulas(dir, 3);
    std::vector<FormulaPtr> normal, mirrored;
    for (const auto& f : fs) {
      normal.push_back(nnf(f));
      CHECK(is_nnf(*normal.back()));
      mirrored.push_back(mirror(f));
    }
    const Direction other = dir == Direction::Future ? Direction::Past : Direction::Future;
    long disagreements = 0, checks = 0;
    for (int len = 1; len <= 4; ++len)
      for_each_trace(len, [&](const Trace& tr) {
        const Trace rev = tr.reversed();
        for (int s = 0; s < len; ++s)
          for (int t = s; t < len; ++t)
            for (std::size_t i = 0; i < fs.size(); ++i) {
              const bool v = eval(*fs[i], tr, s, t, dir);
              disagreements += v != oracle(*fs[i], tr, s, t, dir);
              disagreements += v != eval(*normal[i], tr, s, t, dir);
              disagreements += v != eval(*mirrored[i], rev, len - 1 - t, len - 1 - s, other);
              ++checks;
            }
      });
    CHECK(disagreements == 0);
    CHECK(checks > 1000000);
  }
}

TEST_CASE("evaluation examples") {
  const auto same_later = desugared("F Q[A,B] = same");
  // Positions 1..3; q (same) holds only at 3.
  const Trace tr = single_pair_trace({0, 1, 1, 0});
  CHECK(eval(*same_later, tr, 1, 3, Direction::Future));
  CHECK_FALSE(eval(*same_later, tr, 1, 2, Direction::Future));
  CHECK(eval(*make_true(), tr, 2, 2, Direction::Past));
  for (int t = 0; t < 4; ++t) CHECK_FALSE(eval(*desugared("X true"), tr, t, t, Direction::Future));
  CHECK(eval(*desugared("WX false"), tr, 3, 3, Direction::Future));
  CHECK(eval(*desugared("Fp Q[A,B] = same"), tr, 0, 1, Direction::Past));
  CHECK_FALSE(eval(*desugared("Xp Q[A,B] = same"), tr, 0, 2, Direction::Past));
  CHECK_THROWS_AS(eval(*desugared("X true"), tr, 0, 1, Direction::Past), std::invalid_argument);
  CHECK_THROWS_AS(eval(*parse_formula("Q[A,B] = same"), tr, 0, 1, Direction::Future), std::invalid_argument);
}

TEST_CASE("mirror swaps directions") {
  const auto f = desugared("G (Q[A,B] = same -> X Q[A,B] = apart U Q[A,B] = same)");
  const auto m = mirror(f);
  CHECK(m->op == Op::AlwaysPast);
  CHECK(contains_past_ops(*m));
  CHECK_FALSE(contains_future_ops(*m));
  CHECK(mirror(m)->key == f->key);
}
