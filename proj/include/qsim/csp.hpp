// Finite-domain constraint store: relation-, integer- and Boolean-sorted
// variables, generalized arc consistency propagation, trail-based
// backtracking search.
#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qsim::csp {

struct VarId {
  std::uint32_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

enum class Sort : std::uint8_t { Relation, Integer, Boolean };

/// Initial domain of a variable. Values are integers; relation values are
/// relation indices of a calculus, Boolean values are 0 and 1.
class Domain {
 public:
  /// Relation values given as a bitmask over indices [0, 64).
  static Domain relations(std::uint64_t mask);
  static Domain boolean();
  /// Closed integer range [lo, hi]; empty when lo > hi.
  static Domain range(int lo, int hi);
  static Domain values(std::span<const int> vals);

  Sort sort() const { return sort_; }
  int base() const { return base_; }
  const std::vector<std::uint64_t>& words() const { return words_; }
  int size() const;
  bool empty() const { return size() == 0; }

 private:
  Sort sort_ = Sort::Integer;
  int base_ = 0;
  std::vector<std::uint64_t> words_;
};

struct Literal {
  VarId var;
  bool positive = true;
};

/// Shared value-indexed support table: entry a (or a * stride + b) is the
/// bitmask of allowed values of the last variable.
using Table = std::shared_ptr<const std::vector<std::uint64_t>>;

/// x and y must take a pair (a, b) with bit b set in allowed[a].
struct ExtensionalBinary {
  VarId x, y;
  Table allowed;
};

/// (x, y, z) must take (a, b, c) with bit c set in allowed[a * stride + b].
struct ExtensionalTernary {
  VarId x, y, z;
  Table allowed;
  int stride = 0;
};

/// (x = value) ≡ b, or (x ≠ value) ≡ b when `equal` is false.
struct ReifiedValueEq {
  VarId x;
  int value = 0;
  VarId b;
  bool equal = true;
};

enum class CompareOp : std::uint8_t { Eq, Le };

using Operand = std::variant<VarId, int>;

/// (x op y + offset) ≡ b; without b the comparison must hold. Eq accepts two
/// variables of the same sort, Le requires integer operands.
struct ReifiedIntCompare {
  CompareOp op = CompareOp::Le;
  Operand x;
  Operand y;
  int offset = 0;
  std::optional<VarId> b;
};

enum class Gate : std::uint8_t { And, Or, Not, Implies, Equiv };

/// output ≡ gate(inputs). Not takes one input, Implies and Equiv take two.
struct BoolEquiv {
  Gate gate = Gate::And;
  std::vector<VarId> inputs;
  VarId output;
};

/// (l1 ∨ ... ∨ ln) = truth.
struct BoolClause {
  std::vector<Literal> literals;
  bool truth = true;
};

/// family[index - index_base] = target. With b set the target must be a
/// constant and the constraint is reified: (family[index - base] = c) ≡ b
/// (≠ when `equal` is false).
struct ArrayElement {
  std::vector<VarId> family;
  VarId index;
  int index_base = 0;
  std::variant<VarId, int> target;
  std::optional<VarId> b;
  bool equal = true;
};

/// At most k of the Boolean variables are 1.
struct AtMost {
  std::vector<VarId> vars;
  int k = 0;
};

using Constraint = std::variant<ExtensionalBinary, ExtensionalTernary, ReifiedValueEq,
                                ReifiedIntCompare, BoolEquiv, BoolClause, ArrayElement, AtMost>;

enum class ConstraintKind : std::uint8_t {
  ExtensionalBinary,
  ExtensionalTernary,
  ReifiedValueEq,
  ReifiedIntCompare,
  BoolEquiv,
  BoolClause,
  ArrayElement,
  AtMost,
};
inline constexpr int kNumConstraintKinds = 8;

ConstraintKind kind_of(const Constraint& c);
const char* kind_name(ConstraintKind k);

/// Thrown by post() for sort mismatches and foreign variables, and by
/// new_var() for empty domains.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Outcome : std::uint8_t { Consistent, Inconsistent };

class Store {
 public:
  Store() = default;

  VarId new_var(const Domain& d, std::string name = {});
  void post(Constraint c);
  /// Runs the propagation queue to the GAC fixpoint.
  Outcome propagate();

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  const Constraint& constraint(std::size_t i) const { return constraints_[i].c; }
  std::size_t count(ConstraintKind k) const { return kind_count_[static_cast<int>(k)]; }
  bool valid(VarId v) const { return v.index < vars_.size(); }

  Sort sort(VarId v) const { return vars_[v.index].sort; }
  const std::string& name(VarId v) const { return names_[v.index]; }
  int size(VarId v) const { return vars_[v.index].size; }
  bool fixed(VarId v) const { return vars_[v.index].size == 1; }
  bool contains(VarId v, int value) const;
  int min(VarId v) const;
  int max(VarId v) const;
  /// The value of a fixed variable.
  int value(VarId v) const { return min(v); }
  std::vector<int> values(VarId v) const;
  /// Domain as a bitmask of (value - base); only for variables spanning one word.
  std::uint64_t mask(VarId v) const;
  int base(VarId v) const { return vars_[v.index].base; }
  bool single_word(VarId v) const { return vars_[v.index].nwords == 1; }

  // Domain updates. Each returns false when the domain becomes empty; the
  // store is then failed until the enclosing level is popped.
  bool restrict_mask(VarId v, std::uint64_t mask);
  bool assign(VarId v, int value);
  bool remove(VarId v, int value);
  bool restrict_range(VarId v, int lo, int hi);
  bool restrict_values(VarId v, std::span<const int> keep);

  bool failed() const { return failed_; }

  /// Branching tier: variables of a higher tier are branched on first; tier 0
  /// marks auxiliary variables. New variables get tier 1.
  void set_tier(VarId v, std::uint8_t tier) { vars_[v.index].tier = tier; }
  std::uint8_t tier(VarId v) const { return vars_[v.index].tier; }
  void set_decision(VarId v, bool decision) { set_tier(v, decision ? 1 : 0); }
  bool decision(VarId v) const { return tier(v) > 0; }

  void push_level();
  void pop_level();
  int level() const { return static_cast<int>(levels_.size()); }

  std::uint64_t propagation_count() const { return propagations_; }

  /// Variables, domains and constraints as structured text.
  std::string dump() const;

 private:
  struct VarInfo {
    Sort sort;
    std::uint8_t tier;
    std::uint16_t nwords;
    int base;
    int size;
    std::uint32_t word_begin;
  };
  struct Posted {
    Constraint c;
    std::uint8_t priority;
  };
  struct TrailEntry {
    std::uint32_t word;
    std::uint32_t var;
    std::uint64_t old;
  };

  friend class Propagators;

  bool set_word(VarId v, std::uint32_t w, std::uint64_t bits);
  void changed(VarId v);
  void check_var(VarId v) const;
  void fail();

  std::vector<VarInfo> vars_;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> word_stamp_;
  std::vector<std::vector<std::uint32_t>> watchers_;
  std::vector<Posted> constraints_;
  std::vector<char> queued_;
  std::vector<std::uint32_t> queue_[2];
  std::size_t queue_head_[2] = {0, 0};
  std::int64_t current_ = -1;
  std::vector<TrailEntry> trail_;
  std::vector<std::size_t> levels_;
  std::vector<std::array<std::vector<std::uint32_t>, 2>> pending_;
  std::uint32_t stamp_ = 1;
  std::uint32_t next_stamp_ = 2;
  std::vector<std::uint32_t> stamp_stack_;
  bool failed_ = false;
  int failed_level_ = -1;
  std::uint64_t propagations_ = 0;
  std::size_t kind_count_[kNumConstraintKinds] = {};
};

/// Splits a relation domain so that the first part belongs to the given
/// tractable subclass and is as large as possible. With an empty subclass the
/// split is ({lowest index}, rest). Throws std::invalid_argument when the
/// domain has fewer than two values.
std::pair<std::uint64_t, std::uint64_t> tractable_split(std::uint64_t domain,
                                                        std::span<const std::uint64_t> subclass);

/// Branching strategy: smallest-domain-first within the highest tier that still
/// has unfixed variables. Relation variables are split with tractable_split,
/// integer and Boolean variables min-value-first.
struct Branching {
  std::vector<std::uint64_t> tractable_subclass;
};

struct SearchLimits {
  std::int64_t node_budget = -1;  // negative: unlimited
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class SearchStatus : std::uint8_t { Solution, NoSolution, Exhausted };

struct SearchStats {
  std::int64_t nodes = 0;
  std::int64_t backtracks = 0;
  std::int64_t solutions = 0;
};

/// Values of all variables, indexed by VarId::index.
struct Solution {
  std::vector<int> values;
  int operator[](VarId v) const { return values[v.index]; }
  bool operator==(const Solution&) const = default;
};

struct SolveResult {
  SearchStatus status = SearchStatus::NoSolution;
  Solution solution;
  SearchStats stats;
};

/// First solution under the deterministic branching order. The store is
/// returned to its state at entry (after the initial propagation).
SolveResult solve(Store& store, const Branching& branching, const SearchLimits& limits = {});

struct SolveAllResult {
  SearchStatus status = SearchStatus::NoSolution;  // Exhausted when a budget ran out
  std::vector<Solution> solutions;
  bool limit_reached = false;
  SearchStats stats;
};

/// Enumerates solutions that differ on `projection` (all variables when empty),
/// stopping after `limit` of them. Each reported Solution is a full assignment.
SolveAllResult solve_all(Store& store, const Branching& branching, std::size_t limit,
                         std::span<const VarId> projection = {}, const SearchLimits& limits = {});

}  // namespace qsim::csp
