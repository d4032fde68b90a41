// Qualitative calculi as data: relations, identity, converse, composition and
// conceptual neighbourhood.
#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qsim {

/// Set of relation indices of one calculus. Calculi have at most 64 relations.
class RelationSet {
 public:
  constexpr RelationSet() = default;
  constexpr explicit RelationSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr RelationSet single(int r) { return RelationSet(std::uint64_t{1} << r); }
  static constexpr RelationSet first_n(int n) {
    return RelationSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int r) const { return (bits_ >> r) & 1u; }
  constexpr bool subset_of(RelationSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr int first() const { return std::countr_zero(bits_); }

  constexpr void insert(int r) { bits_ |= std::uint64_t{1} << r; }
  constexpr void erase(int r) { bits_ &= ~(std::uint64_t{1} << r); }

  constexpr RelationSet operator|(RelationSet o) const { return RelationSet(bits_ | o.bits_); }
  constexpr RelationSet operator&(RelationSet o) const { return RelationSet(bits_ & o.bits_); }
  constexpr RelationSet operator-(RelationSet o) const { return RelationSet(bits_ & ~o.bits_); }
  constexpr RelationSet& operator|=(RelationSet o) { bits_ |= o.bits_; return *this; }
  constexpr RelationSet& operator&=(RelationSet o) { bits_ &= o.bits_; return *this; }
  constexpr bool operator==(const RelationSet&) const = default;

  /// Members in increasing index order.
  std::vector<int> members() const;

 private:
  std::uint64_t bits_ = 0;
};

/// Raised when a calculus document cannot be read or its tables are incoherent.
class CalculusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with a 1-based source position.
class CalculusParseError : public CalculusError {
 public:
  CalculusParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class Calculus {
 public:
  static constexpr int kMaxRelations = 64;

  /// `composition` is row-major: composition[r * n + s] = comp(r, s).
  /// `neighbourhood` lists directed edges; a symmetric graph needs both (r, s)
  /// and (s, r), which validate() checks. Throws CalculusError on shape errors (sizes, duplicate names, ranges);
  /// algebraic coherence is checked separately by validate().
  Calculus(std::string name, std::vector<std::string> relations, int identity,
           std::vector<int> converse, std::vector<RelationSet> composition,
           std::vector<std::pair<int, int>> neighbourhood,
           std::vector<RelationSet> tractable_subclass = {});

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(relations_.size()); }
  const std::string& relation_name(int r) const { return relations_.at(r); }
  const std::vector<std::string>& relation_names() const { return relations_; }
  std::optional<int> index_of(std::string_view relation) const;

  int identity() const { return identity_; }
  int converse(int r) const { return converse_[r]; }
  RelationSet compose(int r, int s) const { return composition_[r * size() + s]; }
  RelationSet neighbours(int r) const { return neighbours_[r]; }
  bool adjacent(int r, int s) const { return neighbours_[r].contains(s); }
  /// Neighbourhood edges (r, s) with r < s.
  std::vector<std::pair<int, int>> neighbourhood_edges() const;
  RelationSet all() const { return RelationSet::first_n(size()); }

  /// Optional table of relation sets forming a tractable subclass, used only
  /// as a branching heuristic.
  const std::vector<RelationSet>& tractable_subclass() const { return tractable_; }

  bool operator==(const Calculus&) const = default;

 private:
  std::string name_;
  std::vector<std::string> relations_;
  int identity_;
  std::vector<int> converse_;
  std::vector<RelationSet> composition_;
  std::vector<RelationSet> neighbours_;
  std::vector<RelationSet> tractable_;
};

struct Violation {
  std::string axiom;    // e.g. "converse involution"
  std::string witness;  // offending tuple, rendered with relation names
};

/// Checks the five coherence axioms; an empty result means the calculus is valid.
std::vector<Violation> validate(const Calculus& c);

struct LoadedCalculus {
  Calculus calculus;
  std::vector<std::string> warnings;
};

/// Reads the text format documented in docs/calculus-format.md. Throws
/// CalculusParseError on syntax errors and CalculusError when the tables
/// violate an axiom.
LoadedCalculus load_calculus(std::string_view source);

/// Inverse of load_calculus.
std::string serialize(const Calculus& c);

const Calculus& builtin_rcc8();
const Calculus& builtin_cardinal();

/// Builtin by name ("rcc8", "cardinal"); nullptr when unknown.
const Calculus* find_builtin_calculus(std::string_view name);

}  // namespace qsim
