#include "qsim/csp.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <sstream>

namespace qsim::csp {

namespace {

constexpr std::uint64_t kAll = ~std::uint64_t{0};

std::uint64_t shift_bits(std::uint64_t m, int shift) {
  if (shift >= 64 || shift <= -64) return 0;
  return shift >= 0 ? m << shift : m >> -shift;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------
// Domain

Domain Domain::relations(std::uint64_t mask) {
  Domain d;
  d.sort_ = Sort::Relation;
  d.words_ = {mask};
  return d;
}

Domain Domain::boolean() {
  Domain d;
  d.sort_ = Sort::Boolean;
  d.words_ = {0b11};
  return d;
}

Domain Domain::range(int lo, int hi) {
  Domain d;
  d.sort_ = Sort::Integer;
  d.base_ = lo;
  if (lo > hi) return d;
  const std::int64_t n = std::int64_t{hi} - lo + 1;
  d.words_.assign(static_cast<std::size_t>((n + 63) / 64), kAll);
  if (n % 64 != 0) d.words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
  return d;
}

Domain Domain::values(std::span<const int> vals) {
  Domain d;
  d.sort_ = Sort::Integer;
  if (vals.empty()) return d;
  const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
  d.base_ = *mn;
  d.words_.assign(static_cast<std::size_t>((std::int64_t{*mx} - *mn) / 64 + 1), 0);
  for (int v : vals) {
    const int off = v - d.base_;
    d.words_[off / 64] |= std::uint64_t{1} << (off % 64);
  }
  return d;
}

int Domain::size() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

ConstraintKind kind_of(const Constraint& c) { return static_cast<ConstraintKind>(c.index()); }

const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::ExtensionalBinary: return "extensional_binary";
    case ConstraintKind::ExtensionalTernary: return "extensional_ternary";
    case ConstraintKind::ReifiedValueEq: return "reified_value_eq";
    case ConstraintKind::ReifiedIntCompare: return "reified_int_compare";
    case ConstraintKind::BoolEquiv: return "bool_equiv";
    case ConstraintKind::BoolClause: return "bool_clause";
    case ConstraintKind::ArrayElement: return "array_element";
    case ConstraintKind::AtMost: return "at_most";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Store: variables and trail

VarId Store::new_var(const Domain& d, std::string name) {
  if (d.empty()) throw ModelError("empty domain for variable '" + name + "'");
  if (d.words().size() > 0xffff) throw ModelError("domain too large");
  VarId id{static_cast<std::uint32_t>(vars_.size())};
  vars_.push_back(VarInfo{d.sort(), 1, static_cast<std::uint16_t>(d.words().size()), d.base(),
                          d.size(), static_cast<std::uint32_t>(words_.size())});
  words_.insert(words_.end(), d.words().begin(), d.words().end());
  word_stamp_.resize(words_.size(), 0);
  names_.push_back(std::move(name));
  watchers_.emplace_back();
  return id;
}

void Store::check_var(VarId v) const {
  if (!valid(v)) throw ModelError("variable " + std::to_string(v.index) + " does not belong to this store");
}

bool Store::contains(VarId v, int value) const {
  const VarInfo& vi = vars_[v.index];
  const std::int64_t off = std::int64_t{value} - vi.base;
  if (off < 0 || off >= std::int64_t{vi.nwords} * 64) return false;
  return (words_[vi.word_begin + off / 64] >> (off % 64)) & 1u;
}

int Store::min(VarId v) const {
  const VarInfo& vi = vars_[v.index];
  for (std::uint32_t w = 0; w < vi.nwords; ++w)
    if (auto bits = words_[vi.word_begin + w]) return vi.base + int(w) * 64 + std::countr_zero(bits);
  return INT_MAX;
}

int Store::max(VarId v) const {
  const VarInfo& vi = vars_[v.index];
  for (std::uint32_t w = vi.nwords; w-- > 0;)
    if (auto bits = words_[vi.word_begin + w]) return vi.base + int(w) * 64 + 63 - std::countl_zero(bits);
  return INT_MIN;
}

std::vector<int> Store::values(VarId v) const {
  const VarInfo& vi = vars_[v.index];
  std::vector<int> out;
  out.reserve(vi.size);
  for (std::uint32_t w = 0; w < vi.nwords; ++w)
    for (auto bits = words_[vi.word_begin + w]; bits; bits &= bits - 1)
      out.push_back(vi.base + int(w) * 64 + std::countr_zero(bits));
  return out;
}

std::uint64_t Store::mask(VarId v) const { return words_[vars_[v.index].word_begin]; }

bool Store::set_word(VarId v, std::uint32_t w, std::uint64_t bits) {
  VarInfo& vi = vars_[v.index];
  const std::uint32_t gi = vi.word_begin + w;
  const std::uint64_t old = words_[gi];
  if (old == bits) return true;
  if (!levels_.empty() && word_stamp_[gi] != stamp_) {
    trail_.push_back({gi, v.index, old});
    word_stamp_[gi] = stamp_;
  }
  words_[gi] = bits;
  vi.size += std::popcount(bits) - std::popcount(old);
  if (vi.size == 0) {
    fail();
    return false;
  }
  changed(v);
  return true;
}

bool Store::restrict_mask(VarId v, std::uint64_t m) {
  return set_word(v, 0, words_[vars_[v.index].word_begin] & m);
}

bool Store::assign(VarId v, int value) {
  if (!contains(v, value)) {
    fail();
    return false;
  }
  const VarInfo& vi = vars_[v.index];
  const int off = value - vi.base;
  for (std::uint32_t w = 0; w < vi.nwords; ++w) {
    const std::uint64_t keep = (int(w) == off / 64) ? (std::uint64_t{1} << (off % 64)) : 0;
    if (!set_word(v, w, words_[vi.word_begin + w] & keep)) return false;
  }
  return true;
}

bool Store::remove(VarId v, int value) {
  if (!contains(v, value)) return true;
  const VarInfo& vi = vars_[v.index];
  const int off = value - vi.base;
  return set_word(v, off / 64, words_[vi.word_begin + off / 64] & ~(std::uint64_t{1} << (off % 64)));
}

bool Store::restrict_range(VarId v, int lo, int hi) {
  const VarInfo& vi = vars_[v.index];
  const std::int64_t span = std::int64_t{vi.nwords} * 64;
  const std::int64_t a = std::max<std::int64_t>(std::int64_t{lo} - vi.base, 0);
  const std::int64_t b = std::min<std::int64_t>(std::int64_t{hi} - vi.base, span - 1);
  for (std::uint32_t w = 0; w < vi.nwords; ++w) {
    const std::int64_t first = std::int64_t{w} * 64;
    std::uint64_t keep = 0;
    if (a <= b && b >= first && a < first + 64) {
      const int from = static_cast<int>(std::max<std::int64_t>(a - first, 0));
      const int to = static_cast<int>(std::min<std::int64_t>(b - first, 63));
      keep = (to == 63 ? kAll : ((std::uint64_t{1} << (to + 1)) - 1)) & ~((std::uint64_t{1} << from) - 1);
    }
    if (!set_word(v, w, words_[vi.word_begin + w] & keep)) return false;
  }
  return true;
}

bool Store::restrict_values(VarId v, std::span<const int> keep) {
  const VarInfo& vi = vars_[v.index];
  std::vector<std::uint64_t> m(vi.nwords, 0);
  for (int value : keep) {
    const std::int64_t off = std::int64_t{value} - vi.base;
    if (off >= 0 && off < std::int64_t{vi.nwords} * 64) m[off / 64] |= std::uint64_t{1} << (off % 64);
  }
  for (std::uint32_t w = 0; w < vi.nwords; ++w)
    if (!set_word(v, w, words_[vi.word_begin + w] & m[w])) return false;
  return true;
}

void Store::changed(VarId v) {
  for (std::uint32_t c : watchers_[v.index]) {
    if (static_cast<std::int64_t>(c) == current_ || queued_[c]) continue;
    queued_[c] = 1;
    queue_[constraints_[c].priority].push_back(c);
  }
}

void Store::fail() {
  if (!failed_) {
    failed_ = true;
    failed_level_ = level();
  }
  for (int p = 0; p < 2; ++p) {
    for (std::size_t i = queue_head_[p]; i < queue_[p].size(); ++i) queued_[queue_[p][i]] = 0;
    queue_[p].clear();
    queue_head_[p] = 0;
  }
}

void Store::push_level() {
  levels_.push_back(trail_.size());
  stamp_stack_.push_back(stamp_);
  stamp_ = next_stamp_++;
  // Constraints still waiting for propagation must be waiting again after the
  // matching pop_level, or their first run would be undone with the level.
  auto& pending = pending_.emplace_back();
  for (int p = 0; p < 2; ++p)
    pending[p].assign(queue_[p].begin() + static_cast<std::ptrdiff_t>(queue_head_[p]), queue_[p].end());
}

void Store::pop_level() {
  if (levels_.empty()) throw std::logic_error("pop_level at root");
  const std::size_t mark = levels_.back();
  levels_.pop_back();
  for (std::size_t i = trail_.size(); i-- > mark;) {
    const TrailEntry& e = trail_[i];
    vars_[e.var].size += std::popcount(e.old) - std::popcount(words_[e.word]);
    words_[e.word] = e.old;
  }
  trail_.resize(mark);
  stamp_ = stamp_stack_.back();
  stamp_stack_.pop_back();
  if (failed_ && failed_level_ > level()) failed_ = false;
  for (int p = 0; p < 2; ++p) {
    for (std::size_t i = queue_head_[p]; i < queue_[p].size(); ++i) queued_[queue_[p][i]] = 0;
    queue_[p] = std::move(pending_.back()[p]);
    queue_head_[p] = 0;
    for (std::uint32_t ci : queue_[p]) queued_[ci] = 1;
  }
  pending_.pop_back();
}

// ---------------------------------------------------------------------------
// Propagators

class Propagators {
 public:
  static bool run(Store& s, const Constraint& c) {
    return std::visit([&](const auto& k) { return apply(s, k); }, c);
  }

 private:
  static bool apply(Store& s, const ExtensionalBinary& c) {
    const auto& table = *c.allowed;
    const std::uint64_t dx = s.mask(c.x), dy = s.mask(c.y);
    std::uint64_t sx = 0, sy = 0;
    for (std::uint64_t b = dx; b; b &= b - 1) {
      const int a = std::countr_zero(b);
      if (static_cast<std::size_t>(a) >= table.size()) continue;
      if (const std::uint64_t m = table[a] & dy) {
        sx |= std::uint64_t{1} << a;
        sy |= m;
      }
    }
    return s.restrict_mask(c.x, sx) && s.restrict_mask(c.y, sy);
  }

  static bool apply(Store& s, const ExtensionalTernary& c) {
    const auto& table = *c.allowed;
    const std::uint64_t dx = s.mask(c.x), dy = s.mask(c.y), dz = s.mask(c.z);
    std::uint64_t sx = 0, sy = 0, sz = 0;
    for (std::uint64_t ba = dx; ba; ba &= ba - 1) {
      const int a = std::countr_zero(ba);
      if (a >= c.stride) continue;
      for (std::uint64_t bb = dy; bb; bb &= bb - 1) {
        const int b = std::countr_zero(bb);
        if (b >= c.stride) continue;
        if (const std::uint64_t m = table[static_cast<std::size_t>(a) * c.stride + b] & dz) {
          sx |= std::uint64_t{1} << a;
          sy |= std::uint64_t{1} << b;
          sz |= m;
        }
      }
    }
    return s.restrict_mask(c.x, sx) && s.restrict_mask(c.y, sy) && s.restrict_mask(c.z, sz);
  }

  static bool apply(Store& s, const ReifiedValueEq& c) {
    // truth of (x = value)
    const bool may_eq = s.contains(c.x, c.value);
    const bool may_ne = !(s.fixed(c.x) && may_eq);
    auto truth_to_b = [&](bool t) { return (t == c.equal) ? 1 : 0; };
    if (!may_eq && !s.assign(c.b, truth_to_b(false))) return false;
    if (!may_ne && !s.assign(c.b, truth_to_b(true))) return false;
    if (s.fixed(c.b)) {
      const bool want_eq = (s.value(c.b) == 1) == c.equal;
      return want_eq ? s.assign(c.x, c.value) : s.remove(c.x, c.value);
    }
    return true;
  }

  struct Opnd {
    bool is_var;
    VarId v;
    int c;
  };
  static Opnd view(const Operand& o) {
    if (const VarId* v = std::get_if<VarId>(&o)) return {true, *v, 0};
    return {false, VarId{}, std::get<int>(o)};
  }
  static std::int64_t lo(const Store& s, const Opnd& o) { return o.is_var ? s.min(o.v) : o.c; }
  static std::int64_t hi(const Store& s, const Opnd& o) { return o.is_var ? s.max(o.v) : o.c; }
  static bool fixed(const Store& s, const Opnd& o) { return !o.is_var || s.fixed(o.v); }

  static int clamp(std::int64_t v) { return static_cast<int>(std::clamp<std::int64_t>(v, INT_MIN, INT_MAX)); }

  // x <= y + k
  static bool enforce_le(Store& s, const Opnd& x, const Opnd& y, std::int64_t k) {
    if (x.is_var && !s.restrict_range(x.v, INT_MIN, clamp(hi(s, y) + k))) return false;
    if (y.is_var && !s.restrict_range(y.v, clamp(lo(s, x) - k), INT_MAX)) return false;
    if (!x.is_var && !y.is_var && x.c > std::int64_t{y.c} + k) {
      s.fail();
      return false;
    }
    return true;
  }

  static bool compare_le(Store& s, const ReifiedIntCompare& c, const Opnd& x, const Opnd& y) {
    const std::int64_t k = c.offset;
    if (!c.b) return enforce_le(s, x, y, k);
    const VarId b = *c.b;
    const bool can_true = lo(s, x) <= hi(s, y) + k;
    const bool can_false = hi(s, x) > lo(s, y) + k;
    if (!can_true && !s.assign(b, 0)) return false;
    if (!can_false && !s.assign(b, 1)) return false;
    if (!s.fixed(b)) return true;
    // x > y + k  <=>  y <= x - k - 1
    return s.value(b) == 1 ? enforce_le(s, x, y, k) : enforce_le(s, y, x, -k - 1);
  }

  // Values of x compatible with x = y + k, and of y compatible likewise.
  static bool compare_eq(Store& s, const ReifiedIntCompare& c, const Opnd& x, const Opnd& y) {
    const std::int64_t k = c.offset;
    bool can_true;
    const bool both_fixed = fixed(s, x) && fixed(s, y);
    if (both_fixed) {
      can_true = lo(s, x) == lo(s, y) + k;
    } else if (!x.is_var) {
      can_true = s.contains(y.v, clamp(x.c - k));
    } else if (!y.is_var) {
      can_true = s.contains(x.v, clamp(y.c + k));
    } else if (s.single_word(x.v) && s.single_word(y.v)) {
      const int shift = s.base(y.v) + static_cast<int>(k) - s.base(x.v);
      can_true = (s.mask(x.v) & shift_bits(s.mask(y.v), shift)) != 0;
    } else {
      can_true = false;
      for (int v : s.values(x.v))
        if (s.contains(y.v, clamp(v - k))) {
          can_true = true;
          break;
        }
    }
    const bool can_false = !(both_fixed && can_true);
    bool want_true;
    if (c.b) {
      const VarId b = *c.b;
      if (!can_true && !s.assign(b, 0)) return false;
      if (!can_false && !s.assign(b, 1)) return false;
      if (!s.fixed(b)) return true;
      want_true = s.value(b) == 1;
    } else {
      want_true = true;
    }
    if (want_true) {
      if (!can_true) {
        s.fail();
        return false;
      }
      if (!x.is_var) return s.assign(y.v, clamp(x.c - k));
      if (!y.is_var) return s.assign(x.v, clamp(y.c + k));
      if (s.single_word(x.v) && s.single_word(y.v)) {
        const int shift = s.base(y.v) + static_cast<int>(k) - s.base(x.v);
        const std::uint64_t nx = s.mask(x.v) & shift_bits(s.mask(y.v), shift);
        if (!s.restrict_mask(x.v, nx)) return false;
        return s.restrict_mask(y.v, shift_bits(nx, -shift));
      }
      std::vector<int> keep_x, keep_y;
      for (int v : s.values(x.v))
        if (s.contains(y.v, clamp(v - k))) {
          keep_x.push_back(v);
          keep_y.push_back(clamp(v - k));
        }
      return s.restrict_values(x.v, keep_x) && s.restrict_values(y.v, keep_y);
    }
    if (fixed(s, y) && x.is_var && !s.remove(x.v, clamp(lo(s, y) + k))) return false;
    if (fixed(s, x) && y.is_var && !s.remove(y.v, clamp(lo(s, x) - k))) return false;
    if (!x.is_var && !y.is_var && !can_false) {
      s.fail();
      return false;
    }
    return true;
  }

  static bool apply(Store& s, const ReifiedIntCompare& c) {
    const Opnd x = view(c.x), y = view(c.y);
    return c.op == CompareOp::Le ? compare_le(s, c, x, y) : compare_eq(s, c, x, y);
  }

  // out ≡ AND of literals; a literal (v, positive) is true when v = positive.
  static bool and_gate(Store& s, std::span<const Literal> lits, Literal out) {
    auto lit_true = [&](const Literal& l) { return s.fixed(l.var) && (s.value(l.var) == 1) == l.positive; };
    auto lit_false = [&](const Literal& l) { return s.fixed(l.var) && (s.value(l.var) == 1) != l.positive; };
    auto set_lit = [&](const Literal& l, bool t) { return s.assign(l.var, (t == l.positive) ? 1 : 0); };
    for (int round = 0; round < 3; ++round) {
      int n_unfixed = 0;
      const Literal* last_unfixed = nullptr;
      bool any_false = false;
      for (const Literal& l : lits) {
        if (lit_false(l)) {
          any_false = true;
          break;
        }
        if (!lit_true(l)) {
          ++n_unfixed;
          last_unfixed = &l;
        }
      }
      if (any_false) return set_lit(out, false);
      if (n_unfixed == 0) return set_lit(out, true);
      if (lit_true(out)) {
        for (const Literal& l : lits)
          if (!set_lit(l, true)) return false;
        return true;
      }
      if (lit_false(out) && n_unfixed == 1) {
        if (!set_lit(*last_unfixed, false)) return false;
        continue;
      }
      return true;
    }
    return true;
  }

  static bool apply(Store& s, const BoolEquiv& c) {
    switch (c.gate) {
      case Gate::And: {
        std::vector<Literal> lits;
        lits.reserve(c.inputs.size());
        for (VarId v : c.inputs) lits.push_back({v, true});
        return and_gate(s, lits, {c.output, true});
      }
      case Gate::Or: {
        // out ≡ OR(x)  <=>  ¬out ≡ AND(¬x)
        std::vector<Literal> lits;
        lits.reserve(c.inputs.size());
        for (VarId v : c.inputs) lits.push_back({v, false});
        return and_gate(s, lits, {c.output, false});
      }
      case Gate::Not: {
        const Literal lit[] = {{c.inputs[0], false}};
        return and_gate(s, lit, {c.output, true});
      }
      case Gate::Implies: {
        // out ≡ ¬a ∨ b  <=>  ¬out ≡ a ∧ ¬b
        const Literal lits[] = {{c.inputs[0], true}, {c.inputs[1], false}};
        return and_gate(s, lits, {c.output, false});
      }
      case Gate::Equiv: {
        const VarId a = c.inputs[0], b = c.inputs[1], o = c.output;
        for (int round = 0; round < 2; ++round) {
          if (s.fixed(a) && s.fixed(b) && !s.assign(o, s.value(a) == s.value(b) ? 1 : 0)) return false;
          if (s.fixed(o)) {
            const bool same = s.value(o) == 1;
            if (s.fixed(a) && !s.assign(b, same ? s.value(a) : 1 - s.value(a))) return false;
            if (s.fixed(b) && !s.assign(a, same ? s.value(b) : 1 - s.value(b))) return false;
          }
        }
        return true;
      }
    }
    return true;
  }

  static bool apply(Store& s, const BoolClause& c) {
    if (!c.truth) {
      for (const Literal& l : c.literals)
        if (!s.assign(l.var, l.positive ? 0 : 1)) return false;
      return true;
    }
    const Literal* unfixed = nullptr;
    int n_unfixed = 0;
    for (const Literal& l : c.literals) {
      if (s.fixed(l.var)) {
        if ((s.value(l.var) == 1) == l.positive) return true;
      } else {
        ++n_unfixed;
        unfixed = &l;
      }
    }
    if (n_unfixed == 0) {
      s.fail();
      return false;
    }
    if (n_unfixed == 1) return s.assign(unfixed->var, unfixed->positive ? 1 : 0);
    return true;
  }

  static bool apply(Store& s, const ArrayElement& c) {
    const int n = static_cast<int>(c.family.size());
    const std::vector<int> idx = s.values(c.index);
    std::vector<int> support;
    support.reserve(idx.size());
    int only = -1;

    if (!c.b) {
      const bool target_var = std::holds_alternative<VarId>(c.target);
      const std::uint64_t tmask = target_var ? s.mask(std::get<VarId>(c.target))
                                             : std::uint64_t{1} << std::get<int>(c.target);
      std::uint64_t reach = 0;
      for (int i : idx) {
        const int j = i - c.index_base;
        if (j < 0 || j >= n) continue;
        if (const std::uint64_t m = s.mask(c.family[j]) & tmask) {
          support.push_back(i);
          reach |= m;
          only = j;
        }
      }
      if (!s.restrict_values(c.index, support)) return false;
      if (target_var && !s.restrict_mask(std::get<VarId>(c.target), reach)) return false;
      if (support.size() == 1) return s.restrict_mask(c.family[only], tmask);
      return true;
    }

    // Reified with constant target: truth t of (family[index] = value).
    const int value = std::get<int>(c.target);
    const std::uint64_t vbit = std::uint64_t{1} << value;
    const VarId b = *c.b;
    auto b_allows = [&](bool t) { return s.contains(b, (t == c.equal) ? 1 : 0); };
    const bool allow_t = b_allows(true), allow_f = b_allows(false);
    bool reach_t = false, reach_f = false;
    for (int i : idx) {
      const int j = i - c.index_base;
      if (j < 0 || j >= n) continue;
      const std::uint64_t m = s.mask(c.family[j]);
      const bool can_t = (m & vbit) != 0, can_f = (m & ~vbit) != 0;
      if ((allow_t && can_t) || (allow_f && can_f)) {
        support.push_back(i);
        reach_t |= allow_t && can_t;
        reach_f |= allow_f && can_f;
        only = j;
      }
    }
    if (!s.restrict_values(c.index, support)) return false;
    if (!reach_t && !s.assign(b, c.equal ? 0 : 1)) return false;
    if (!reach_f && !s.assign(b, c.equal ? 1 : 0)) return false;
    if (support.size() == 1) {
      if (!reach_f) return s.restrict_mask(c.family[only], vbit);
      if (!reach_t) return s.restrict_mask(c.family[only], ~vbit);
    }
    return true;
  }

  static bool apply(Store& s, const AtMost& c) {
    int ones = 0;
    for (VarId v : c.vars)
      if (s.fixed(v) && s.value(v) == 1) ++ones;
    if (ones > c.k) {
      s.fail();
      return false;
    }
    if (ones == c.k)
      for (VarId v : c.vars)
        if (!s.fixed(v) && !s.assign(v, 0)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Posting

namespace {

void collect_vars(const Constraint& c, std::vector<VarId>& out) {
  std::visit(Overloaded{
                 [&](const ExtensionalBinary& k) { out.insert(out.end(), {k.x, k.y}); },
                 [&](const ExtensionalTernary& k) { out.insert(out.end(), {k.x, k.y, k.z}); },
                 [&](const ReifiedValueEq& k) { out.insert(out.end(), {k.x, k.b}); },
                 [&](const ReifiedIntCompare& k) {
                   if (auto* v = std::get_if<VarId>(&k.x)) out.push_back(*v);
                   if (auto* v = std::get_if<VarId>(&k.y)) out.push_back(*v);
                   if (k.b) out.push_back(*k.b);
                 },
                 [&](const BoolEquiv& k) {
                   out.insert(out.end(), k.inputs.begin(), k.inputs.end());
                   out.push_back(k.output);
                 },
                 [&](const BoolClause& k) {
                   for (const Literal& l : k.literals) out.push_back(l.var);
                 },
                 [&](const ArrayElement& k) {
                   out.insert(out.end(), k.family.begin(), k.family.end());
                   out.push_back(k.index);
                   if (auto* v = std::get_if<VarId>(&k.target)) out.push_back(*v);
                   if (k.b) out.push_back(*k.b);
                 },
                 [&](const AtMost& k) { out.insert(out.end(), k.vars.begin(), k.vars.end()); },
             },
             c);
}

}  // namespace

void Store::post(Constraint c) {
  std::vector<VarId> vs;
  collect_vars(c, vs);
  for (VarId v : vs) check_var(v);

  auto need = [](bool ok, const char* what) {
    if (!ok) throw ModelError(what);
  };
  auto is_bool = [&](VarId v) { return sort(v) == Sort::Boolean; };
  auto small = [&](VarId v) { return single_word(v) && base(v) == 0; };

  std::uint8_t priority = 0;
  std::visit(Overloaded{
                 [&](const ExtensionalBinary& k) {
                   need(k.allowed != nullptr, "extensional constraint without table");
                   need(small(k.x) && small(k.y), "extensional constraint needs small non-negative domains");
                 },
                 [&](const ExtensionalTernary& k) {
                   need(k.allowed != nullptr, "extensional constraint without table");
                   need(small(k.x) && small(k.y) && small(k.z),
                        "extensional constraint needs small non-negative domains");
                   need(k.stride > 0 && k.allowed->size() >= static_cast<std::size_t>(k.stride) * k.stride,
                        "ternary table has wrong shape");
                   priority = 1;
                 },
                 [&](const ReifiedValueEq& k) { need(is_bool(k.b), "reified constraint needs a Boolean"); },
                 [&](const ReifiedIntCompare& k) {
                   const VarId* x = std::get_if<VarId>(&k.x);
                   const VarId* y = std::get_if<VarId>(&k.y);
                   if (k.b) need(is_bool(*k.b), "reified constraint needs a Boolean");
                   if (k.op == CompareOp::Le) {
                     need((!x || sort(*x) == Sort::Integer) && (!y || sort(*y) == Sort::Integer),
                          "ordering comparison on non-integer variable");
                   } else if (x && y) {
                     need(sort(*x) == sort(*y), "equality between variables of different sorts");
                   }
                 },
                 [&](const BoolEquiv& k) {
                   for (VarId v : k.inputs) need(is_bool(v), "Boolean gate over non-Boolean variable");
                   need(is_bool(k.output), "Boolean gate over non-Boolean variable");
                   const std::size_t n = k.inputs.size();
                   switch (k.gate) {
                     case Gate::Not: need(n == 1, "not-gate takes one input"); break;
                     case Gate::Implies:
                     case Gate::Equiv: need(n == 2, "gate takes two inputs"); break;
                     default: break;
                   }
                 },
                 [&](const BoolClause& k) {
                   for (const Literal& l : k.literals) need(is_bool(l.var), "clause over non-Boolean variable");
                 },
                 [&](const ArrayElement& k) {
                   need(sort(k.index) == Sort::Integer, "array index must be integer-sorted");
                   need(!k.family.empty(), "empty array family");
                   const Sort fs = sort(k.family.front());
                   for (VarId v : k.family) need(sort(v) == fs && small(v), "array family must share one small sort");
                   if (auto* t = std::get_if<VarId>(&k.target)) {
                     need(sort(*t) == fs && small(*t), "array target sort mismatch");
                     need(!k.b, "reified array constraint needs a constant target");
                   } else {
                     const int v = std::get<int>(k.target);
                     need(v >= 0 && v < 64, "array target out of range");
                   }
                   if (k.b) need(is_bool(*k.b), "reified constraint needs a Boolean");
                 },
                 [&](const AtMost& k) {
                   for (VarId v : k.vars) need(is_bool(v), "at-most over non-Boolean variable");
                 },
             },
             c);

  const auto ci = static_cast<std::uint32_t>(constraints_.size());
  ++kind_count_[c.index()];
  constraints_.push_back({std::move(c), priority});
  queued_.push_back(0);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  for (VarId v : vs) watchers_[v.index].push_back(ci);
  queued_[ci] = 1;
  queue_[priority].push_back(ci);
}

Outcome Store::propagate() {
  if (failed_) return Outcome::Inconsistent;
  while (true) {
    int p = queue_head_[0] < queue_[0].size() ? 0 : (queue_head_[1] < queue_[1].size() ? 1 : -1);
    if (p < 0) break;
    const std::uint32_t ci = queue_[p][queue_head_[p]++];
    queued_[ci] = 0;
    current_ = ci;
    ++propagations_;
    const bool ok = Propagators::run(*this, constraints_[ci].c);
    current_ = -1;
    if (!ok || failed_) {
      fail();
      return Outcome::Inconsistent;
    }
  }
  for (int p = 0; p < 2; ++p) {
    queue_[p].clear();
    queue_head_[p] = 0;
  }
  return Outcome::Consistent;
}

std::string Store::dump() const {
  std::ostringstream out;
  auto var_name = [&](VarId v) {
    return names_[v.index].empty() ? "_v" + std::to_string(v.index) : names_[v.index];
  };
  auto operand = [&](const Operand& o) {
    if (auto* v = std::get_if<VarId>(&o)) return var_name(*v);
    return std::to_string(std::get<int>(o));
  };
  out << "variables " << vars_.size() << "\n";
  for (std::uint32_t i = 0; i < vars_.size(); ++i) {
    const VarId v{i};
    static const char* sorts[] = {"relation", "integer", "boolean"};
    out << "  " << var_name(v) << " : " << sorts[static_cast<int>(vars_[i].sort)] << " {";
    bool first = true;
    for (int value : values(v)) {
      out << (first ? "" : ",") << value;
      first = false;
    }
    out << "}\n";
  }
  out << "constraints " << constraints_.size() << "\n";
  for (const Posted& p : constraints_) {
    out << "  " << kind_name(kind_of(p.c)) << "(";
    std::visit(Overloaded{
                   [&](const ExtensionalBinary& k) { out << var_name(k.x) << ", " << var_name(k.y); },
                   [&](const ExtensionalTernary& k) {
                     out << var_name(k.x) << ", " << var_name(k.y) << ", " << var_name(k.z);
                   },
                   [&](const ReifiedValueEq& k) {
                     out << var_name(k.x) << (k.equal ? " = " : " != ") << k.value << " <-> " << var_name(k.b);
                   },
                   [&](const ReifiedIntCompare& k) {
                     out << operand(k.x) << (k.op == CompareOp::Le ? " <= " : " = ") << operand(k.y);
                     if (k.offset) out << (k.offset > 0 ? " + " : " - ") << std::abs(k.offset);
                     if (k.b) out << " <-> " << var_name(*k.b);
                   },
                   [&](const BoolEquiv& k) {
                     static const char* gates[] = {"and", "or", "not", "implies", "equiv"};
                     out << var_name(k.output) << " = " << gates[static_cast<int>(k.gate)];
                     for (VarId v : k.inputs) out << ' ' << var_name(v);
                   },
                   [&](const BoolClause& k) {
                     for (std::size_t i = 0; i < k.literals.size(); ++i)
                       out << (i ? " | " : "") << (k.literals[i].positive ? "" : "!") << var_name(k.literals[i].var);
                     out << " = " << k.truth;
                   },
                   [&](const ArrayElement& k) {
                     out << "[" << var_name(k.family.front()) << ".." << var_name(k.family.back()) << "]["
                         << var_name(k.index);
                     if (k.index_base) out << " - " << k.index_base;
                     out << "] " << (k.equal ? "= " : "!= ")
                         << (std::holds_alternative<VarId>(k.target) ? var_name(std::get<VarId>(k.target))
                                                                     : std::to_string(std::get<int>(k.target)));
                     if (k.b) out << " <-> " << var_name(*k.b);
                   },
                   [&](const AtMost& k) {
                     out << "sum(";
                     for (std::size_t i = 0; i < k.vars.size(); ++i) out << (i ? "," : "") << var_name(k.vars[i]);
                     out << ") <= " << k.k;
                   },
               },
               p.c);
    out << ")\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Search

std::pair<std::uint64_t, std::uint64_t> tractable_split(std::uint64_t domain,
                                                        std::span<const std::uint64_t> subclass) {
  if (std::popcount(domain) < 2) throw std::invalid_argument("tractable_split needs a domain with at least two values");
  std::uint64_t best = 0;
  for (std::uint64_t s : subclass)
    if ((s & ~domain) == 0 && s != domain && std::popcount(s) > std::popcount(best)) best = s;
  if (best == 0) best = domain & (~domain + 1);
  return {best, domain & ~best};
}

namespace {

class Search {
 public:
  Search(Store& store, const Branching& branching, const SearchLimits& limits)
      : store_(store), branching_(branching), limits_(limits) {}

  SearchStats stats;
  bool exhausted = false;

  // Restricts the branch to `part`: a bitmask for single-word variables,
  // otherwise a value range [lo, hi] encoded in `range`.
  struct Part {
    std::uint64_t mask = 0;
    int lo = 0, hi = 0;
    bool is_range = false;
  };

  std::optional<VarId> select(std::span<const VarId> restrict_to) const {
    std::optional<VarId> best;
    int best_tier = -1;
    int best_size = INT_MAX;
    auto consider = [&](VarId v) {
      const int sz = store_.size(v);
      if (sz <= 1) return;
      const int tier = store_.tier(v);
      if (tier > best_tier || (tier == best_tier && sz < best_size)) {
        best = v;
        best_tier = tier;
        best_size = sz;
      }
    };
    if (!restrict_to.empty()) {
      for (VarId v : restrict_to) consider(v);
      return best;
    }
    const auto n = static_cast<std::uint32_t>(store_.num_vars());
    for (std::uint32_t i = 0; i < n; ++i) consider(VarId{i});
    return best;
  }

  std::pair<Part, Part> split(VarId v) const {
    Part a, b;
    if (store_.single_word(v)) {
      const std::uint64_t d = store_.mask(v);
      std::pair<std::uint64_t, std::uint64_t> parts;
      if (store_.sort(v) == Sort::Relation)
        parts = tractable_split(d, branching_.tractable_subclass);
      else
        parts = tractable_split(d, {});
      a.mask = parts.first;
      b.mask = parts.second;
      return {a, b};
    }
    const int lo = store_.min(v);
    a.is_range = b.is_range = true;
    a.lo = a.hi = lo;
    b.lo = lo + 1;
    b.hi = store_.max(v);
    return {a, b};
  }

  bool apply(VarId v, const Part& p) {
    return p.is_range ? store_.restrict_range(v, p.lo, p.hi) : store_.restrict_mask(v, p.mask);
  }

  bool out_of_budget() {
    if (limits_.node_budget >= 0 && stats.nodes >= limits_.node_budget) return exhausted = true;
    if (limits_.deadline && (stats.nodes & 255) == 0 && std::chrono::steady_clock::now() >= *limits_.deadline)
      return exhausted = true;
    return false;
  }

  Solution snapshot() const {
    Solution s;
    s.values.resize(store_.num_vars());
    for (std::uint32_t i = 0; i < store_.num_vars(); ++i) s.values[i] = store_.min(VarId{i});
    return s;
  }

  // Depth-first search for one full assignment; on success `found` holds it.
  bool first(std::span<const VarId> restrict_to, std::optional<Solution>& found) {
    const auto v = select(restrict_to);
    if (!v) {
      if (restrict_to.empty()) {
        found = snapshot();
        ++stats.solutions;
        return true;
      }
      return first({}, found);
    }
    const auto [left, right] = split(*v);
    for (const Part* part : {&left, &right}) {
      if (out_of_budget()) return false;
      ++stats.nodes;
      store_.push_level();
      const bool ok = apply(*v, *part) && store_.propagate() == Outcome::Consistent;
      const bool done = ok && first(restrict_to, found);
      store_.pop_level();
      if (done) return true;
      if (exhausted) return false;
    }
    ++stats.backtracks;
    return false;
  }

  // Enumerates solutions that differ on `projection`. Each call finds one
  // solution with the ordinary search, then splits the rest of the subtree by
  // the first projected variable that differs from it: x_1..x_{i-1} agree and
  // x_i does not. The parts are disjoint, so nothing is reported twice, and
  // every probe keeps the full branching order.
  void all(std::span<const VarId> projection, std::size_t limit, std::vector<Solution>& out,
           bool& limit_reached) {
    std::optional<Solution> found;
    store_.push_level();
    first({}, found);
    store_.pop_level();
    if (!found) return;
    out.push_back(std::move(*found));
    if (out.size() >= limit) {
      limit_reached = true;
      return;
    }
    const Solution s = out.back();
    int agreed = 0;
    for (VarId x : projection) {
      if (store_.fixed(x)) continue;
      ++stats.nodes;
      store_.push_level();
      if (store_.remove(x, s[x]) && store_.propagate() == Outcome::Consistent)
        all(projection, limit, out, limit_reached);
      store_.pop_level();
      if (limit_reached || exhausted || out_of_budget()) break;
      store_.push_level();
      ++agreed;
      if (!store_.assign(x, s[x]) || store_.propagate() != Outcome::Consistent) break;
    }
    while (agreed-- > 0) store_.pop_level();
  }

 private:
  Store& store_;
  const Branching& branching_;
  SearchLimits limits_;
};

}  // namespace

SolveResult solve(Store& store, const Branching& branching, const SearchLimits& limits) {
  SolveResult result;
  if (store.propagate() == Outcome::Inconsistent) return result;
  Search search(store, branching, limits);
  std::optional<Solution> found;
  search.first({}, found);
  result.stats = search.stats;
  if (found) {
    result.status = SearchStatus::Solution;
    result.solution = std::move(*found);
  } else if (search.exhausted) {
    result.status = SearchStatus::Exhausted;
  }
  return result;
}

SolveAllResult solve_all(Store& store, const Branching& branching, std::size_t limit,
                         std::span<const VarId> projection, const SearchLimits& limits) {
  SolveAllResult result;
  if (limit == 0 || store.propagate() == Outcome::Inconsistent) return result;
  std::vector<VarId> proj(projection.begin(), projection.end());
  if (proj.empty())
    for (std::uint32_t i = 0; i < store.num_vars(); ++i) proj.push_back(VarId{i});
  Search search(store, branching, limits);
  search.all(proj, limit, result.solutions, result.limit_reached);
  result.stats = search.stats;
  if (search.exhausted)
    result.status = SearchStatus::Exhausted;
  else if (!result.solutions.empty())
    result.status = SearchStatus::Solution;
  return result;
}

}  // namespace qsim::csp
