// Bounded past/future temporal logic over qualitative arrays: AST, parser,
// desugaring, negation normal form and the reference evaluator.
#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsim/calculus.hpp"

namespace qsim::temporal {

enum class Op : std::uint8_t {
  True,
  Atom,        // Q[A,B] = r  /  Q[A,B] != r
  Member,      // Q[A,B] in {..}  /  notin {..}
  SameObject,  // A == B  /  A != B  (object identity, for quantifier bodies)
  Not,
  And,
  Or,
  Implies,
  Ite,
  Next,
  WeakNext,
  Always,
  Eventually,
  Until,    // kids: chi, phi
  Release,  // kids: chi, phi
  Prev,
  WeakPrev,
  AlwaysPast,
  EventuallyPast,
  Since,    // kids: chi, phi
  Trigger,  // kids: chi, phi
  ForAll,
  Exists,
};

enum class Direction : std::uint8_t { Future, Past };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::True;
  std::vector<FormulaPtr> kids;

  // Atom / Member / SameObject. `positive` selects = / in / == over their
  // negated forms. Names are kept for printing; indices are filled in by
  // desugar (-1 before).
  std::string a, b;
  std::vector<std::string> relation_names;
  bool positive = true;
  int obj_a = -1, obj_b = -1, relation = -1;

  // ForAll / Exists: binders range over `domain` (object names) or, when
  // `domain_name` is set, over the named set of the vocabulary.
  std::vector<std::string> binders;
  std::vector<std::string> domain;
  std::string domain_name;

  // Canonical text, used as a memo key.
  std::string key;

  bool resolved_atom() const { return op == Op::Atom && relation >= 0; }
};

// Construction helpers; each computes the canonical key.
FormulaPtr make_true();
FormulaPtr make_false();  // Not(True)
FormulaPtr make_atom(std::string a, std::string b, std::string relation, bool equal = true);
FormulaPtr make_resolved_atom(int a, int b, int relation, bool equal, std::string a_name = {},
                              std::string b_name = {}, std::string rel_name = {});
FormulaPtr make_member(std::string a, std::string b, std::vector<std::string> relations, bool in = true);
FormulaPtr make_same_object(std::string a, std::string b, bool same = true);
FormulaPtr make_unary(Op op, FormulaPtr kid);
FormulaPtr make_binary(Op op, FormulaPtr left, FormulaPtr right);
FormulaPtr make_nary(Op op, std::vector<FormulaPtr> kids);  // And / Or; flattens, 0 and 1 kids collapse
FormulaPtr make_ite(FormulaPtr cond, FormulaPtr then_f, FormulaPtr else_f);
FormulaPtr make_quantifier(Op op, std::vector<std::string> binders, std::vector<std::string> domain,
                           std::string domain_name, FormulaPtr body);

inline FormulaPtr make_not(FormulaPtr f) { return make_unary(Op::Not, std::move(f)); }

/// Concrete syntax accepted by parse_formula.
std::string to_string(const Formula& f);

bool is_future_op(Op op);
bool is_past_op(Op op);
bool contains_future_ops(const Formula& f);
bool contains_past_ops(const Formula& f);
/// Height of the syntax tree counted in nodes; leaves have depth 1.
int depth(const Formula& f);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t column, const std::string& message);
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

FormulaPtr parse_formula(std::string_view text);

struct InterStateRule {
  FormulaPtr past;
  FormulaPtr future;
  std::string label;
};

/// Parses `past => future`. Throws ParseError on syntax errors and on a
/// past side containing future operators or vice versa.
InterStateRule parse_rule(std::string_view text, std::string label = {});

/// Names a desugared formula may refer to.
struct Vocabulary {
  std::vector<std::string> objects;
  const Calculus* calculus = nullptr;
  std::map<std::string, std::vector<std::string>> sets;
};

class DesugarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resolves atoms and expands Member, SameObject, Ite and the quantifiers.
/// The result contains True, resolved Atoms, Not, And, Or, Implies and the
/// temporal operators only.
FormulaPtr desugar(const FormulaPtr& f, const Vocabulary& vocab);

/// Negation normal form of a desugared formula: Not occurs only on True, and
/// Implies is eliminated. Throws std::invalid_argument on mixed directions.
FormulaPtr nnf(const FormulaPtr& f);
bool is_nnf(const Formula& f);

/// Swaps every future operator with its past counterpart.
FormulaPtr mirror(const FormulaPtr& f);

/// Ground qualitative arrays over time: relation index of Q[a,b,t].
struct Trace {
  int objects = 0;
  int length = 0;
  std::vector<int> relations;  // [(t * objects + a) * objects + b]

  Trace() = default;
  Trace(int objects, int length) : objects(objects), length(length), relations(std::size_t(objects) * objects * length, 0) {}
  int at(int a, int b, int t) const { return relations[(std::size_t(t) * objects + a) * objects + b]; }
  int& at(int a, int b, int t) { return relations[(std::size_t(t) * objects + a) * objects + b]; }
  Trace reversed() const;
};

/// Truth of a desugared formula on trace positions [s..t]. Future formulas
/// read atoms at s, past formulas at t. Throws std::invalid_argument when the
/// formula uses operators of the other direction or is not desugared.
bool eval(const Formula& f, const Trace& trace, int s, int t, Direction dir);

}  // namespace qsim::temporal
