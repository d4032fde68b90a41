#include "qsim/translate.hpp"

#include <algorithm>

namespace qsim::translate {

using csp::VarId;
using temporal::Formula;
using temporal::Op;

StageSpace::StageSpace(int objects, int horizon)
    : objects_(objects), horizon_(horizon), vars_(static_cast<std::size_t>(objects) * objects * horizon) {}

std::vector<VarId> StageSpace::family(int a, int b) const {
  std::vector<VarId> out;
  out.reserve(horizon_);
  for (int t = 0; t < horizon_; ++t) out.push_back(at(a, b, t));
  return out;
}

namespace {

csp::Operand operand(const Bound& b) {
  if (const int* c = std::get_if<int>(&b)) return *c;
  return std::get<VarId>(b);
}

std::string bound_key(const Bound& b) {
  if (const int* c = std::get_if<int>(&b)) return std::to_string(*c);
  return "v" + std::to_string(std::get<VarId>(b).index);
}

const char* dir_key(Direction d) { return d == Direction::Future ? "+" : "-"; }

}  // namespace

Translator::Translator(csp::Store& store, const StageSpace& space) : store_(store), space_(space) {}

VarId Translator::boolean() {
  const VarId b = store_.new_var(csp::Domain::boolean());
  store_.set_decision(b, false);
  return b;
}

VarId Translator::constant(bool value) {
  std::optional<VarId>& slot = value ? true_ : false_;
  if (!slot) {
    slot = boolean();
    store_.assign(*slot, value ? 1 : 0);
  }
  return *slot;
}

VarId Translator::gate(csp::Gate g, std::vector<VarId> inputs) {
  if ((g == csp::Gate::And || g == csp::Gate::Or) && inputs.size() == 1) return inputs[0];
  if (g == csp::Gate::And && inputs.empty()) return constant(true);
  if (g == csp::Gate::Or && inputs.empty()) return constant(false);
  const VarId out = boolean();
  store_.post(csp::BoolEquiv{g, std::move(inputs), out});
  return out;
}

VarId Translator::time_var() {
  const VarId v = store_.new_var(csp::Domain::range(0, space_.horizon() - 1));
  store_.set_tier(v, time_decision_ ? 2 : 0);
  return v;
}

int Translator::lo(const Bound& b) const {
  if (const int* c = std::get_if<int>(&b)) return *c;
  return store_.min(std::get<VarId>(b));
}

int Translator::hi(const Bound& b) const {
  if (const int* c = std::get_if<int>(&b)) return *c;
  return store_.max(std::get<VarId>(b));
}

void Translator::post_le(Bound x, Bound y, int offset) {
  if (std::holds_alternative<int>(x) && std::holds_alternative<int>(y)) {
    if (std::get<int>(x) > std::get<int>(y) + offset) store_.post(csp::BoolClause{{}, true});
    return;
  }
  store_.post(csp::ReifiedIntCompare{csp::CompareOp::Le, operand(x), operand(y), offset, std::nullopt});
}

std::optional<VarId> Translator::reified_le(Bound x, Bound y, int offset) {
  if (std::holds_alternative<int>(x) && std::holds_alternative<int>(y)) {
    if (std::get<int>(x) <= std::get<int>(y) + offset) return std::nullopt;  // always true
    return constant(false);
  }
  const VarId b = boolean();
  store_.post(csp::ReifiedIntCompare{csp::CompareOp::Le, operand(x), operand(y), offset, b});
  return b;
}

VarId Translator::reified_eq(Bound x, Bound y, int offset) {
  if (std::holds_alternative<int>(x) && std::holds_alternative<int>(y))
    return constant(std::get<int>(x) == std::get<int>(y) + offset);
  const VarId b = boolean();
  store_.post(csp::ReifiedIntCompare{csp::CompareOp::Eq, operand(x), operand(y), offset, b});
  return b;
}

bool Translator::is_state(const Formula& f) {
  auto it = state_cache_.find(f.key);
  if (it != state_cache_.end()) return it->second;
  const bool s = !temporal::contains_future_ops(f) && !temporal::contains_past_ops(f);
  state_cache_.emplace(f.key, s);
  return s;
}

VarId Translator::atom(const Formula& f, Bound at) {
  if (!f.resolved_atom()) throw TranslationError("translation needs a desugared formula");
  const VarId b = boolean();
  if (const int* t = std::get_if<int>(&at)) {
    store_.post(csp::ReifiedValueEq{space_.at(f.obj_a, f.obj_b, *t), f.relation, b, f.positive});
  } else {
    store_.post(csp::ArrayElement{space_.family(f.obj_a, f.obj_b), std::get<VarId>(at), 0, f.relation, b,
                                  f.positive});
  }
  return b;
}

// ---------------------------------------------------------------------------
// Unfolding

TranslationResult Translator::unfold(const FormulaPtr& f, Direction dir, int s, int t) {
  if (s < 0 || t >= space_.horizon() || s > t)
    throw TranslationError("interval [" + std::to_string(s) + ".." + std::to_string(t) + "] outside horizon");
  const std::size_t c0 = store_.num_constraints(), v0 = store_.num_vars();
  TranslationResult r;
  r.truth = unfold_rec(f, dir, s, t);
  for (std::size_t i = c0; i < store_.num_constraints(); ++i) r.posted.push_back(i);
  for (std::size_t i = v0; i < store_.num_vars(); ++i) r.fresh.push_back(VarId{static_cast<std::uint32_t>(i)});
  return r;
}

VarId Translator::unfold_rec(const FormulaPtr& fp, Direction dir, int s, int t) {
  const Formula& f = *fp;
  if (dir == Direction::Future ? temporal::is_past_op(f.op) : temporal::is_future_op(f.op))
    throw TranslationError("operator of the wrong direction in " + f.key);

  std::string key;
  if (memo_on_) {
    key = is_state(f) ? "S|" + f.key + "@" + std::to_string(dir == Direction::Future ? s : t)
                      : std::string("U") + dir_key(dir) + f.key + "|" + std::to_string(s) + ":" + std::to_string(t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }

  auto rec = [&](int k, int lo, int hi) { return unfold_rec(f.kids[k], dir, lo, hi); };
  VarId out;
  switch (f.op) {
    case Op::True: out = constant(true); break;
    case Op::Atom: out = atom(f, dir == Direction::Future ? s : t); break;
    case Op::Not: out = gate(csp::Gate::Not, {rec(0, s, t)}); break;
    case Op::And:
    case Op::Or: {
      std::vector<VarId> kids;
      for (std::size_t k = 0; k < f.kids.size(); ++k) kids.push_back(rec(int(k), s, t));
      out = gate(f.op == Op::And ? csp::Gate::And : csp::Gate::Or, std::move(kids));
      break;
    }
    case Op::Implies: out = gate(csp::Gate::Implies, {rec(0, s, t), rec(1, s, t)}); break;

    case Op::Next: out = s + 1 <= t ? rec(0, s + 1, t) : constant(false); break;
    case Op::WeakNext: out = s == t ? constant(true) : rec(0, s + 1, t); break;
    case Op::Always:
    case Op::Eventually: {
      std::vector<VarId> kids;
      for (int r = s; r <= t; ++r) kids.push_back(rec(0, r, t));
      out = gate(f.op == Op::Always ? csp::Gate::And : csp::Gate::Or, std::move(kids));
      break;
    }
    case Op::Until:  // φ ∨ (χ ∧ ◦(χ U φ))
      out = s == t ? rec(1, s, t)
                   : gate(csp::Gate::Or, {rec(1, s, t), gate(csp::Gate::And, {rec(0, s, t), unfold_rec(fp, dir, s + 1, t)})});
      break;
    case Op::Release:  // φ ∧ (χ ∨ ◦(χ R φ))
      out = s == t ? rec(1, s, t)
                   : gate(csp::Gate::And, {rec(1, s, t), gate(csp::Gate::Or, {rec(0, s, t), unfold_rec(fp, dir, s + 1, t)})});
      break;

    case Op::Prev: out = s <= t - 1 ? rec(0, s, t - 1) : constant(false); break;
    case Op::WeakPrev: out = s == t ? constant(true) : rec(0, s, t - 1); break;
    case Op::AlwaysPast:
    case Op::EventuallyPast: {
      std::vector<VarId> kids;
      for (int r = s; r <= t; ++r) kids.push_back(rec(0, s, r));
      out = gate(f.op == Op::AlwaysPast ? csp::Gate::And : csp::Gate::Or, std::move(kids));
      break;
    }
    case Op::Since:
      out = s == t ? rec(1, s, t)
                   : gate(csp::Gate::Or, {rec(1, s, t), gate(csp::Gate::And, {rec(0, s, t), unfold_rec(fp, dir, s, t - 1)})});
      break;
    case Op::Trigger:
      out = s == t ? rec(1, s, t)
                   : gate(csp::Gate::And, {rec(1, s, t), gate(csp::Gate::Or, {rec(0, s, t), unfold_rec(fp, dir, s, t - 1)})});
      break;

    default: throw TranslationError("translation needs a desugared formula: " + f.key);
  }
  if (memo_on_) memo_.emplace(std::move(key), out);
  return out;
}

// ---------------------------------------------------------------------------
// Array translation

TranslationResult Translator::array(const FormulaPtr& f, Direction dir, Bound s, Bound t) {
  if (!temporal::is_nnf(*f)) throw TranslationError("array translation needs a formula in negation normal form");
  if (dir == Direction::Future && !std::holds_alternative<int>(t))
    throw TranslationError("future formulas need a constant interval end");
  if (dir == Direction::Past && !std::holds_alternative<int>(s))
    throw TranslationError("past formulas need a constant interval start");
  if (lo(s) < 0 || hi(t) >= space_.horizon() || lo(s) > hi(t)) throw TranslationError("interval outside horizon");
  const std::size_t c0 = store_.num_constraints(), v0 = store_.num_vars();
  TranslationResult r;
  r.truth = array_rec(f, dir, s, t);
  for (std::size_t i = c0; i < store_.num_constraints(); ++i) r.posted.push_back(i);
  for (std::size_t i = v0; i < store_.num_vars(); ++i) r.fresh.push_back(VarId{static_cast<std::uint32_t>(i)});
  return r;
}

VarId Translator::always_range(const FormulaPtr& f, Direction dir, Bound from, Bound to, Bound fixed) {
  const bool future = dir == Direction::Future;
  int first = lo(from), last = hi(to);
  if (future) last = std::min(last, std::get<int>(fixed));
  else first = std::max(first, std::get<int>(fixed));
  std::vector<VarId> parts;
  for (int k = first; k <= last; ++k) {
    std::vector<VarId> guards;
    if (std::holds_alternative<VarId>(from))
      if (auto g = reified_le(from, k)) guards.push_back(*g);
    if (std::holds_alternative<VarId>(to))
      if (auto g = reified_le(k, to)) guards.push_back(*g);
    const VarId body = future ? array_rec(f, dir, k, fixed) : array_rec(f, dir, fixed, k);
    parts.push_back(guards.empty() ? body : gate(csp::Gate::Implies, {gate(csp::Gate::And, guards), body}));
  }
  return gate(csp::Gate::And, std::move(parts));
}

VarId Translator::array_rec(const FormulaPtr& fp, Direction dir, Bound s, Bound t) {
  const Formula& f = *fp;
  const bool future = dir == Direction::Future;
  if (future ? temporal::is_past_op(f.op) : temporal::is_future_op(f.op))
    throw TranslationError("operator of the wrong direction in " + f.key);
  const Bound at = future ? s : t;

  std::string key;
  if (memo_on_) {
    key = is_state(f) && std::holds_alternative<int>(at)
              ? "S|" + f.key + "@" + bound_key(at)
              : std::string("A") + dir_key(dir) + f.key + "|" + bound_key(s) + ":" + bound_key(t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }

  auto rec = [&](int k, Bound lo_b, Bound hi_b) { return array_rec(f.kids[k], dir, lo_b, hi_b); };
  auto fresh_time = [&](int lo_v, int hi_v) {
    const VarId r = time_var();
    store_.restrict_range(r, std::min(lo_v, hi_v), hi_v);
    return r;
  };
  VarId out;
  switch (f.op) {
    case Op::True: out = constant(true); break;
    case Op::Not:
      if (f.kids[0]->op != Op::True) throw TranslationError("array translation needs NNF: " + f.key);
      out = constant(false);
      break;
    case Op::Atom: out = atom(f, at); break;
    case Op::And:
    case Op::Or: {
      std::vector<VarId> kids;
      for (std::size_t k = 0; k < f.kids.size(); ++k) kids.push_back(rec(int(k), s, t));
      out = gate(f.op == Op::And ? csp::Gate::And : csp::Gate::Or, std::move(kids));
      break;
    }

    case Op::Next:
    case Op::WeakNext:
    case Op::Prev:
    case Op::WeakPrev: {
      const bool strong = f.op == Op::Next || f.op == Op::Prev;
      if (std::holds_alternative<int>(at)) {
        const int p = std::get<int>(at);
        const bool room = std::get<int>(s) < std::get<int>(t);
        if (!room) out = constant(!strong);
        else out = future ? rec(0, p + 1, t) : rec(0, s, p - 1);
        break;
      }
      // b1 ≡ (s + 1 ≤ t); r = s + 1 (future) or r = t − 1 (past) when b1.
      const VarId b1 = *reified_le(s, t, -1);
      VarId r;
      VarId b2;
      if (future) {
        r = fresh_time(lo(s) + 1, std::get<int>(t));
        store_.post(csp::ReifiedIntCompare{csp::CompareOp::Eq, r, operand(s), 1, b1});
        b2 = rec(0, r, t);
      } else {
        r = fresh_time(std::get<int>(s), std::max(std::get<int>(s), hi(t) - 1));
        store_.post(csp::ReifiedIntCompare{csp::CompareOp::Eq, r, operand(t), -1, b1});
        b2 = rec(0, s, r);
      }
      out = strong ? gate(csp::Gate::And, {b1, b2}) : gate(csp::Gate::Implies, {b1, b2});
      break;
    }

    case Op::Eventually:
    case Op::EventuallyPast: {
      const VarId r = fresh_time(lo(s), hi(t));
      post_le(s, r);
      post_le(r, t);
      out = future ? rec(0, r, t) : rec(0, s, r);
      break;
    }
    case Op::Always: out = always_range(f.kids[0], dir, s, t, t); break;
    case Op::AlwaysPast: out = always_range(f.kids[0], dir, s, t, s); break;

    case Op::Until: {
      // b ≡ b1 ∧ (b2 ∨ (b3 ∧ b4)): φ on [r..t], r = s, or u = r − 1 and χ on
      // [k..t] for every k in [s..u].
      const VarId r = fresh_time(lo(s), hi(t));
      post_le(s, r);
      post_le(r, t);
      const VarId b1 = rec(1, r, t);
      const VarId b2 = reified_eq(s, r, 0);
      const VarId u = fresh_time(lo(s), hi(t));
      post_le(s, u);
      post_le(u, r);
      const VarId b3 = reified_eq(u, r, -1);
      const VarId b4 = always_range(f.kids[0], dir, s, u, t);
      out = gate(csp::Gate::And, {b1, gate(csp::Gate::Or, {b2, gate(csp::Gate::And, {b3, b4})})});
      break;
    }
    case Op::Since: {
      const VarId r = fresh_time(lo(s), hi(t));
      post_le(s, r);
      post_le(r, t);
      const VarId b1 = rec(1, s, r);
      const VarId b2 = reified_eq(r, t, 0);
      const VarId u = fresh_time(lo(s), hi(t));
      post_le(r, u);
      post_le(u, t);
      const VarId b3 = reified_eq(u, r, 1);
      const VarId b4 = always_range(f.kids[0], dir, u, t, s);
      out = gate(csp::Gate::And, {b1, gate(csp::Gate::Or, {b2, gate(csp::Gate::And, {b3, b4})})});
      break;
    }
    case Op::Release:
    case Op::Trigger: {
      // χ R φ ≡ □φ ∨ φ U (χ ∧ φ); T mirrors it.
      const FormulaPtr& chi = f.kids[0];
      const FormulaPtr& phi = f.kids[1];
      const bool rel = f.op == Op::Release;
      const FormulaPtr rewritten = temporal::make_nary(
          Op::Or, {temporal::make_unary(rel ? Op::Always : Op::AlwaysPast, phi),
                   temporal::make_binary(rel ? Op::Until : Op::Since, phi, temporal::make_nary(Op::And, {chi, phi}))});
      out = array_rec(rewritten, dir, s, t);
      break;
    }
    default: throw TranslationError("array translation needs a desugared NNF formula: " + f.key);
  }
  if (memo_on_) memo_.emplace(std::move(key), out);
  return out;
}

// ---------------------------------------------------------------------------
// Rules

TranslationResult Translator::translate(const FormulaPtr& f, Direction dir, int s, int t, Mode mode) {
  if (mode == Mode::Unfold) return unfold(f, dir, s, t);
  return array(temporal::nnf(f), dir, s, t);
}

void Translator::require(const FormulaPtr& f, Direction dir, int s, int t, Mode mode) {
  const VarId b = translate(f, dir, s, t, mode).truth;
  store_.post(csp::BoolClause{{{b, true}}, true});
}

void Translator::post_rule(const temporal::InterStateRule& rule, int t0, Mode mode) {
  const int last = space_.horizon() - 1;
  if (t0 < 0 || t0 > last - 1)
    throw TranslationError("rule position " + std::to_string(t0) + " needs a later stage within the horizon");
  if (mode == Mode::Unfold) {
    const VarId past = unfold(rule.past, Direction::Past, 0, t0).truth;
    const VarId fut = unfold(rule.future, Direction::Future, t0 + 1, last).truth;
    store_.post(csp::BoolClause{{{past, false}, {fut, true}}, true});
    return;
  }
  // The array translation is exact only for truth = 1, so the implication is
  // posted as (¬φ) ∨ ψ with both sides in positive position.
  const VarId not_past = array(temporal::nnf(temporal::make_not(rule.past)), Direction::Past, 0, t0).truth;
  const VarId fut = array(temporal::nnf(rule.future), Direction::Future, t0 + 1, last).truth;
  store_.post(csp::BoolClause{{{not_past, true}, {fut, true}}, true});
}

}  // namespace qsim::translate
