// Shared fixtures for the unit tests: a two-relation calculus, exhaustive
// formula and trace generators over two objects.
#pragma once

#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "qsim/calculus.hpp"
#include "qsim/temporal.hpp"

namespace qsim::testing {

/// Relations {same, apart}; same is the identity, both are self-converse and
/// adjacent to each other.
inline const Calculus& two_relation_calculus() {
  static const Calculus c("two", {"same", "apart"}, 0, {0, 1},
                          {RelationSet(0b01), RelationSet(0b10), RelationSet(0b10), RelationSet(0b11)}, {{0, 1}, {1, 0}});
  return c;
}

inline temporal::Vocabulary two_object_vocabulary() { return {{"A", "B"}, &two_relation_calculus(), {}}; }

/// Leaves used by the exhaustive suites: a positive atom, a negative atom and
/// an atom on the converse pair.
inline std::vector<temporal::FormulaPtr> leaves() {
  using temporal::make_resolved_atom;
  return {make_resolved_atom(0, 1, 0, true, "A", "B", "same"), make_resolved_atom(0, 1, 0, false, "A", "B", "same"),
          make_resolved_atom(1, 0, 1, true, "B", "A", "apart")};
}

/// Every formula of depth at most `max_depth` (leaves have depth 1), built from
/// the operators of one direction plus the propositional ones.
inline std::vector<temporal::FormulaPtr> formulas(temporal::Direction dir, int max_depth) {
  using temporal::Op;
  const bool future = dir == temporal::Direction::Future;
  const std::vector<Op> unary = future ? std::vector<Op>{Op::Not, Op::Next, Op::WeakNext, Op::Always, Op::Eventually}
                                       : std::vector<Op>{Op::Not, Op::Prev, Op::WeakPrev, Op::AlwaysPast,
                                                         Op::EventuallyPast};
  const std::vector<Op> binary = future ? std::vector<Op>{Op::And, Op::Or, Op::Implies, Op::Until, Op::Release}
                                        : std::vector<Op>{Op::And, Op::Or, Op::Implies, Op::Since, Op::Trigger};
  std::vector<temporal::FormulaPtr> all = leaves();
  for (int d = 1; d < max_depth; ++d) {
    std::vector<temporal::FormulaPtr> next = all;
    for (Op op : unary)
      for (const auto& f : all) next.push_back(temporal::make_unary(op, f));
    for (Op op : binary)
      for (const auto& a : all)
        for (const auto& b : all)
          next.push_back(op == Op::And || op == Op::Or ? temporal::make_nary(op, {a, b})
                                                       : temporal::make_binary(op, a, b));
    // And/Or flatten, so a few shapes coincide; keep one of each.
    std::unordered_set<std::string> seen;
    std::erase_if(next, [&](const temporal::FormulaPtr& f) { return !seen.insert(f->key).second; });
    all = std::move(next);
  }
  return all;
}

/// All traces over two objects of the given length: Q[A,B,t] free, Q[B,A,t]
/// its converse, the diagonal the identity.
inline void for_each_trace(int length, const std::function<void(const temporal::Trace&)>& fn) {
  const Calculus& c = two_relation_calculus();
  for (int bits = 0; bits < (1 << length); ++bits) {
    temporal::Trace tr(2, length);
    for (int t = 0; t < length; ++t) {
      const int r = (bits >> t) & 1;
      tr.at(0, 0, t) = tr.at(1, 1, t) = c.identity();
      tr.at(0, 1, t) = r;
      tr.at(1, 0, t) = c.converse(r);
    }
    fn(tr);
  }
}

}  // namespace qsim::testing
