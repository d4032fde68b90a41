// Compilation of temporal formulas into constraints on the staged relation
// variables Q[A,B,t]: the unfolding translation (constant intervals) and the
// array translation (variable interval bounds, element constraints).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qsim/csp.hpp"
#include "qsim/temporal.hpp"

namespace qsim::translate {

using temporal::Direction;
using temporal::FormulaPtr;

/// Q[A,B,t] for every ordered pair and every t < horizon.
class StageSpace {
 public:
  StageSpace() = default;
  StageSpace(int objects, int horizon);

  int objects() const { return objects_; }
  int horizon() const { return horizon_; }
  csp::VarId at(int a, int b, int t) const { return vars_.at(index(a, b, t)); }
  void set(int a, int b, int t, csp::VarId v) { vars_.at(index(a, b, t)) = v; }
  /// Q[a,b,0..horizon-1].
  std::vector<csp::VarId> family(int a, int b) const;

 private:
  std::size_t index(int a, int b, int t) const {
    return (static_cast<std::size_t>(t) * objects_ + a) * objects_ + b;
  }
  int objects_ = 0;
  int horizon_ = 0;
  std::vector<csp::VarId> vars_;
};

enum class Mode : std::uint8_t { Unfold, Array };

/// A time bound: a stage index or an integer variable ranging over stages.
using Bound = std::variant<int, csp::VarId>;

struct TranslationResult {
  csp::VarId truth;
  std::vector<std::size_t> posted;  // constraint indices in the store
  std::vector<csp::VarId> fresh;    // auxiliary variables
};

class TranslationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Translator {
 public:
  Translator(csp::Store& store, const StageSpace& space);

  /// Shared subformulas are translated once per interval when enabled (default).
  void set_memo(bool on) { memo_on_ = on; }
  /// Time variables of the array translation are branched on before the
  /// relation variables when set, and left to propagation otherwise.
  void set_time_vars_decision(bool on) { time_decision_ = on; }

  /// Unfolding translation on the constant interval [s..t]; truth ≡ φ.
  TranslationResult unfold(const FormulaPtr& f, Direction dir, int s, int t);

  /// Array translation of an NNF formula. Future formulas take a constant end
  /// t and a constant or variable start s; past formulas the mirror image.
  /// truth = 1 is satisfiable exactly when φ holds (for some value of the
  /// variable bound); truth = 0 carries no information.
  TranslationResult array(const FormulaPtr& f, Direction dir, Bound s, Bound t);

  TranslationResult translate(const FormulaPtr& f, Direction dir, int s, int t, Mode mode);

  /// Posts (φ on [0..t0]) → (ψ on [t0+1..horizon-1]). Requires desugared
  /// formulas and 0 ≤ t0 ≤ horizon − 2.
  void post_rule(const temporal::InterStateRule& rule, int t0, Mode mode);

  /// Requires φ to hold on [s..t].
  void require(const FormulaPtr& f, Direction dir, int s, int t, Mode mode);

  csp::VarId constant(bool value);

 private:
  csp::VarId boolean();
  csp::VarId gate(csp::Gate g, std::vector<csp::VarId> inputs);
  csp::VarId time_var();
  void post_le(Bound x, Bound y, int offset = 0);
  std::optional<csp::VarId> reified_le(Bound x, Bound y, int offset = 0);
  csp::VarId reified_eq(Bound x, Bound y, int offset);
  int lo(const Bound& b) const;
  int hi(const Bound& b) const;

  csp::VarId unfold_rec(const FormulaPtr& f, Direction dir, int s, int t);
  csp::VarId array_rec(const FormulaPtr& f, Direction dir, Bound s, Bound t);
  csp::VarId atom(const temporal::Formula& f, Bound at);
  // Conjunction of φ over all starts k ∈ [lo..hi] (future, end t), or over all
  // ends k ∈ [lo..hi] (past, start s), each guarded by lo ≤ k ≤ hi.
  csp::VarId always_range(const FormulaPtr& f, Direction dir, Bound lo, Bound hi, Bound fixed);

  bool is_state(const temporal::Formula& f);

  csp::Store& store_;
  const StageSpace& space_;
  bool memo_on_ = true;
  bool time_decision_ = false;
  std::optional<csp::VarId> true_, false_;
  std::unordered_map<std::string, csp::VarId> memo_;
  std::unordered_map<std::string, bool> state_cache_;
};

}  // namespace qsim::translate
