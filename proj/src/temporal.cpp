#include "qsim/temporal.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace qsim::temporal {

namespace {

bool is_leaf(const Formula& f) {
  switch (f.op) {
    case Op::True:
    case Op::Atom:
    case Op::Member:
    case Op::SameObject: return true;
    case Op::Not: return f.kids[0]->op == Op::True;
    default: return false;
  }
}

const char* unary_token(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::Next: return "X";
    case Op::WeakNext: return "WX";
    case Op::Always: return "G";
    case Op::Eventually: return "F";
    case Op::Prev: return "Xp";
    case Op::WeakPrev: return "WXp";
    case Op::AlwaysPast: return "Gp";
    case Op::EventuallyPast: return "Fp";
    default: return nullptr;
  }
}

const char* binary_token(Op op) {
  switch (op) {
    case Op::Until: return "U";
    case Op::Release: return "R";
    case Op::Since: return "S";
    case Op::Trigger: return "T";
    case Op::Implies: return "->";
    default: return nullptr;
  }
}

std::string wrap(const Formula& f) { return is_leaf(f) ? f.key : "(" + f.key + ")"; }

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

std::string render(const Formula& f) {
  switch (f.op) {
    case Op::True: return "true";
    case Op::Atom: {
      auto name = [](const std::string& n, int i) { return n.empty() ? "#" + std::to_string(i) : n; };
      return "Q[" + name(f.a, f.obj_a) + "," + name(f.b, f.obj_b) + "] " + (f.positive ? "= " : "!= ") +
             (f.relation_names.empty() ? "#" + std::to_string(f.relation) : f.relation_names[0]);
    }
    case Op::Member:
      return "Q[" + f.a + "," + f.b + "] " + (f.positive ? "in {" : "notin {") + join(f.relation_names, ", ") + "}";
    case Op::SameObject: return f.a + (f.positive ? " == " : " != ") + f.b;
    case Op::Not:
      if (f.kids[0]->op == Op::True) return "false";
      return "!" + wrap(*f.kids[0]);
    case Op::And:
    case Op::Or: {
      std::vector<std::string> parts;
      for (const auto& k : f.kids) parts.push_back(wrap(*k));
      return join(parts, f.op == Op::And ? " & " : " | ");
    }
    case Op::Ite: return "ite(" + f.kids[0]->key + ", " + f.kids[1]->key + ", " + f.kids[2]->key + ")";
    case Op::ForAll:
    case Op::Exists: {
      std::string out = (f.op == Op::ForAll ? "forall " : "exists ") + join(f.binders, ", ") + " in ";
      out += f.domain_name.empty() ? "{" + join(f.domain, ", ") + "}" : f.domain_name;
      return out + ": " + f.kids[0]->key;
    }
    default:
      if (const char* u = unary_token(f.op)) return std::string(u) + " " + wrap(*f.kids[0]);
      return wrap(*f.kids[0]) + " " + binary_token(f.op) + " " + wrap(*f.kids[1]);
  }
}

FormulaPtr finish(Formula f) {
  f.key = render(f);
  return std::make_shared<const Formula>(std::move(f));
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

FormulaPtr make_true() {
  static const FormulaPtr t = finish(Formula{});
  return t;
}

FormulaPtr make_false() {
  static const FormulaPtr f = make_unary(Op::Not, make_true());
  return f;
}

FormulaPtr make_atom(std::string a, std::string b, std::string relation, bool equal) {
  Formula f;
  f.op = Op::Atom;
  f.a = std::move(a);
  f.b = std::move(b);
  f.relation_names = {std::move(relation)};
  f.positive = equal;
  return finish(std::move(f));
}

FormulaPtr make_resolved_atom(int a, int b, int relation, bool equal, std::string a_name, std::string b_name,
                              std::string rel_name) {
  Formula f;
  f.op = Op::Atom;
  f.obj_a = a;
  f.obj_b = b;
  f.relation = relation;
  f.positive = equal;
  f.a = std::move(a_name);
  f.b = std::move(b_name);
  if (!rel_name.empty()) f.relation_names = {std::move(rel_name)};
  return finish(std::move(f));
}

FormulaPtr make_member(std::string a, std::string b, std::vector<std::string> relations, bool in) {
  Formula f;
  f.op = Op::Member;
  f.a = std::move(a);
  f.b = std::move(b);
  f.relation_names = std::move(relations);
  f.positive = in;
  return finish(std::move(f));
}

FormulaPtr make_same_object(std::string a, std::string b, bool same) {
  Formula f;
  f.op = Op::SameObject;
  f.a = std::move(a);
  f.b = std::move(b);
  f.positive = same;
  return finish(std::move(f));
}

FormulaPtr make_unary(Op op, FormulaPtr kid) {
  if (!unary_token(op)) throw std::invalid_argument("not a unary operator");
  Formula f;
  f.op = op;
  f.kids = {std::move(kid)};
  return finish(std::move(f));
}

FormulaPtr make_binary(Op op, FormulaPtr left, FormulaPtr right) {
  if (!binary_token(op)) throw std::invalid_argument("not a binary operator");
  Formula f;
  f.op = op;
  f.kids = {std::move(left), std::move(right)};
  return finish(std::move(f));
}

FormulaPtr make_nary(Op op, std::vector<FormulaPtr> kids) {
  if (op != Op::And && op != Op::Or) throw std::invalid_argument("make_nary takes And or Or");
  std::vector<FormulaPtr> flat;
  for (auto& k : kids) {
    if (k->op == op)
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    else
      flat.push_back(std::move(k));
  }
  if (flat.empty()) return op == Op::And ? make_true() : make_false();
  if (flat.size() == 1) return flat[0];
  Formula f;
  f.op = op;
  f.kids = std::move(flat);
  return finish(std::move(f));
}

FormulaPtr make_ite(FormulaPtr cond, FormulaPtr then_f, FormulaPtr else_f) {
  Formula f;
  f.op = Op::Ite;
  f.kids = {std::move(cond), std::move(then_f), std::move(else_f)};
  return finish(std::move(f));
}

FormulaPtr make_quantifier(Op op, std::vector<std::string> binders, std::vector<std::string> domain,
                           std::string domain_name, FormulaPtr body) {
  if (op != Op::ForAll && op != Op::Exists) throw std::invalid_argument("not a quantifier");
  Formula f;
  f.op = op;
  f.binders = std::move(binders);
  f.domain = std::move(domain);
  f.domain_name = std::move(domain_name);
  f.kids = {std::move(body)};
  return finish(std::move(f));
}

std::string to_string(const Formula& f) { return f.key; }

bool is_future_op(Op op) {
  switch (op) {
    case Op::Next:
    case Op::WeakNext:
    case Op::Always:
    case Op::Eventually:
    case Op::Until:
    case Op::Release: return true;
    default: return false;
  }
}

bool is_past_op(Op op) {
  switch (op) {
    case Op::Prev:
    case Op::WeakPrev:
    case Op::AlwaysPast:
    case Op::EventuallyPast:
    case Op::Since:
    case Op::Trigger: return true;
    default: return false;
  }
}

bool contains_future_ops(const Formula& f) {
  if (is_future_op(f.op)) return true;
  return std::any_of(f.kids.begin(), f.kids.end(), [](const FormulaPtr& k) { return contains_future_ops(*k); });
}

bool contains_past_ops(const Formula& f) {
  if (is_past_op(f.op)) return true;
  return std::any_of(f.kids.begin(), f.kids.end(), [](const FormulaPtr& k) { return contains_past_ops(*k); });
}

int depth(const Formula& f) {
  int d = 0;
  for (const auto& k : f.kids) d = std::max(d, depth(*k));
  return d + 1;
}

// ---------------------------------------------------------------------------
// Parser

ParseError::ParseError(std::size_t column, const std::string& message)
    : std::runtime_error("column " + std::to_string(column) + ": " + message), column_(column) {}

namespace {

struct Token {
  enum Kind { Ident, Sym, End } kind = End;
  std::string text;
  std::size_t column = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view src) {
  static const char* const kSymbols[] = {"<->", "->", "=>", "==", "!=", "[", "]", ",", "{", "}",
                                         "(",   ")",  "=",  "&",  "|",  "!", ":"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
                                src[j] == '\'' || src[j] == '.'))
        ++j;
      out.push_back({Token::Ident, std::string(src.substr(i, j - i)), i + 1});
      i = j;
      continue;
    }
    bool matched = false;
    for (const char* s : kSymbols) {
      const std::string_view sym(s);
      if (src.substr(i, sym.size()) == sym) {
        out.push_back({Token::Sym, std::string(sym), i + 1});
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(i + 1, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::End, "", src.size() + 1});
  return out;
}

bool unary_keyword(const std::string& s, Op& op) {
  static const std::map<std::string, Op, std::less<>> kUnary = {
      {"X", Op::Next},        {"WX", Op::WeakNext},  {"F", Op::Eventually},  {"G", Op::Always},
      {"Xp", Op::Prev},       {"WXp", Op::WeakPrev}, {"Fp", Op::EventuallyPast}, {"Gp", Op::AlwaysPast}};
  auto it = kUnary.find(s);
  if (it == kUnary.end()) return false;
  op = it->second;
  return true;
}

bool binary_keyword(const std::string& s, Op& op) {
  if (s == "U") op = Op::Until;
  else if (s == "R") op = Op::Release;
  else if (s == "S") op = Op::Since;
  else if (s == "T") op = Op::Trigger;
  else return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  FormulaPtr formula() {
    const Token& t = peek();
    if (t.kind == Token::Ident && (t.text == "forall" || t.text == "exists")) return quantifier();
    return implication();
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_sym(const char* s) const { return peek().kind == Token::Sym && peek().text == s; }
  bool at_end() const { return peek().kind == Token::End; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  void expect(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }

  std::string ident(const char* what) {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what);
    return next().text;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(t.column, msg + (t.kind == Token::End ? " at end of input" : ", found '" + t.text + "'"));
  }

 private:
  FormulaPtr quantifier() {
    const Op op = next().text == "forall" ? Op::ForAll : Op::Exists;
    std::vector<std::string> binders{ident("binder name")};
    while (at_sym(",")) {
      ++pos_;
      binders.push_back(ident("binder name"));
    }
    if (peek().kind != Token::Ident || peek().text != "in") fail("expected 'in'");
    ++pos_;
    std::vector<std::string> domain;
    std::string domain_name;
    if (at_sym("{")) {
      domain = name_list();
    } else {
      domain_name = ident("object set");
    }
    expect(":");
    return make_quantifier(op, std::move(binders), std::move(domain), std::move(domain_name), formula());
  }

  std::vector<std::string> name_list() {
    expect("{");
    std::vector<std::string> out;
    if (!at_sym("}")) {
      out.push_back(ident("name"));
      while (at_sym(",")) {
        ++pos_;
        out.push_back(ident("name"));
      }
    }
    expect("}");
    return out;
  }

  FormulaPtr implication() {
    FormulaPtr left = disjunction();
    if (at_sym("->")) {
      ++pos_;
      return make_binary(Op::Implies, left, rhs());
    }
    if (at_sym("<->")) {
      ++pos_;
      FormulaPtr right = rhs();
      return make_nary(Op::And, {make_binary(Op::Implies, left, right), make_binary(Op::Implies, right, left)});
    }
    return left;
  }

  // Right operand of -> and <->; a quantifier may follow directly.
  FormulaPtr rhs() {
    const Token& t = peek();
    if (t.kind == Token::Ident && (t.text == "forall" || t.text == "exists")) return quantifier();
    return implication();
  }

  FormulaPtr disjunction() {
    std::vector<FormulaPtr> kids{conjunction()};
    while (at_sym("|")) {
      ++pos_;
      kids.push_back(conjunction());
    }
    return kids.size() == 1 ? kids[0] : make_nary(Op::Or, std::move(kids));
  }

  FormulaPtr conjunction() {
    std::vector<FormulaPtr> kids{binary()};
    while (at_sym("&")) {
      ++pos_;
      kids.push_back(binary());
    }
    return kids.size() == 1 ? kids[0] : make_nary(Op::And, std::move(kids));
  }

  FormulaPtr binary() {
    FormulaPtr left = unary();
    Op op;
    if (peek().kind == Token::Ident && binary_keyword(peek().text, op)) {
      ++pos_;
      return make_binary(op, left, binary());
    }
    return left;
  }

  FormulaPtr unary() {
    if (at_sym("!")) {
      ++pos_;
      return make_not(unary());
    }
    Op op;
    const Token& t = peek();
    // A keyword followed by '=' or '!=' is an object name in a comparison.
    if (t.kind == Token::Ident && unary_keyword(t.text, op) && !comparison_follows()) {
      ++pos_;
      return make_unary(op, unary());
    }
    return primary();
  }

  bool comparison_follows() const {
    const Token& n = peek(1);
    return n.kind == Token::Sym && (n.text == "==" || n.text == "!=");
  }

  FormulaPtr primary() {
    const Token& t = peek();
    if (at_sym("(")) {
      ++pos_;
      FormulaPtr f = formula();
      expect(")");
      return f;
    }
    if (t.kind != Token::Ident) fail("expected a formula");
    if (t.text == "forall" || t.text == "exists") return quantifier();
    if (t.text == "true" && !comparison_follows()) {
      ++pos_;
      return make_true();
    }
    if (t.text == "false" && !comparison_follows()) {
      ++pos_;
      return make_false();
    }
    if (t.text == "ite" && peek(1).kind == Token::Sym && peek(1).text == "(") {
      pos_ += 2;
      FormulaPtr c = formula();
      expect(",");
      FormulaPtr a = formula();
      expect(",");
      FormulaPtr b = formula();
      expect(")");
      return make_ite(c, a, b);
    }
    if (t.text == "Q" && peek(1).kind == Token::Sym && peek(1).text == "[") return atom();
    const std::string a = next().text;
    if (at_sym("==") || at_sym("!=")) {
      const bool same = next().text == "==";
      return make_same_object(a, ident("object name"), same);
    }
    pos_--;
    fail("expected a formula");
  }

  FormulaPtr atom() {
    pos_ += 2;  // Q [
    std::string a = ident("object name");
    expect(",");
    std::string b = ident("object name");
    expect("]");
    if (at_sym("=") || at_sym("!=")) {
      const bool eq = next().text == "=";
      return make_atom(std::move(a), std::move(b), ident("relation name"), eq);
    }
    if (peek().kind == Token::Ident && (peek().text == "in" || peek().text == "notin")) {
      const bool in = next().text == "in";
      return make_member(std::move(a), std::move(b), name_list(), in);
    }
    fail("expected '=', '!=', 'in' or 'notin'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

FormulaPtr parse_formula(std::string_view text) {
  Parser p(text);
  FormulaPtr f = p.formula();
  if (!p.at_end()) p.fail("unexpected trailing input");
  return f;
}

InterStateRule parse_rule(std::string_view text, std::string label) {
  const std::size_t arrow = text.find("=>");
  if (arrow == std::string_view::npos) throw ParseError(text.size() + 1, "expected '=>' in rule");
  InterStateRule rule;
  try {
    rule.past = parse_formula(text.substr(0, arrow));
  } catch (const ParseError& e) {
    throw ParseError(e.column(), std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
  try {
    rule.future = parse_formula(text.substr(arrow + 2));
  } catch (const ParseError& e) {
    throw ParseError(e.column() + arrow + 2, std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
  if (contains_future_ops(*rule.past)) throw ParseError(1, "past side of rule uses a future operator");
  if (contains_past_ops(*rule.future)) throw ParseError(arrow + 3, "future side of rule uses a past operator");
  rule.label = label.empty() ? std::string(text) : std::move(label);
  return rule;
}

// ---------------------------------------------------------------------------
// Desugaring

namespace {

class Desugarer {
 public:
  explicit Desugarer(const Vocabulary& v) : vocab_(v) {
    if (!vocab_.calculus) throw DesugarError("vocabulary has no calculus");
  }

  FormulaPtr run(const FormulaPtr& f) {
    switch (f->op) {
      case Op::True: return f;
      case Op::Atom: return atom(f->a, f->b, f->relation_names.at(0), f->positive);
      case Op::Member: {
        std::vector<FormulaPtr> kids;
        for (const auto& r : f->relation_names) kids.push_back(atom(f->a, f->b, r, f->positive));
        return make_nary(f->positive ? Op::Or : Op::And, std::move(kids));
      }
      case Op::SameObject: {
        const bool same = object(f->a) == object(f->b);
        return same == f->positive ? make_true() : make_false();
      }
      case Op::Ite: {
        FormulaPtr c = run(f->kids[0]);
        return make_nary(Op::And, {make_binary(Op::Implies, c, run(f->kids[1])),
                                   make_binary(Op::Implies, make_not(c), run(f->kids[2]))});
      }
      case Op::ForAll:
      case Op::Exists: return quantifier(*f);
      case Op::And:
      case Op::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : f->kids) kids.push_back(run(k));
        return make_nary(f->op, std::move(kids));
      }
      default:
        if (f->kids.size() == 1) return make_unary(f->op, run(f->kids[0]));
        return make_binary(f->op, run(f->kids[0]), run(f->kids[1]));
    }
  }

 private:
  int object(const std::string& name) const {
    std::string resolved = name;
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == name) {
        resolved = it->second;
        break;
      }
    auto pos = std::find(vocab_.objects.begin(), vocab_.objects.end(), resolved);
    if (pos == vocab_.objects.end()) throw DesugarError("unknown object '" + name + "'");
    return static_cast<int>(pos - vocab_.objects.begin());
  }

  FormulaPtr atom(const std::string& a, const std::string& b, const std::string& rel, bool eq) const {
    const int ia = object(a), ib = object(b);
    const auto r = vocab_.calculus->index_of(rel);
    if (!r) throw DesugarError("unknown relation '" + rel + "' in calculus '" + vocab_.calculus->name() + "'");
    return make_resolved_atom(ia, ib, *r, eq, vocab_.objects[ia], vocab_.objects[ib], rel);
  }

  FormulaPtr quantifier(const Formula& f) {
    std::vector<std::string> domain;
    if (!f.domain_name.empty()) {
      if (f.domain_name == "objects") {
        domain = vocab_.objects;
      } else {
        auto it = vocab_.sets.find(f.domain_name);
        if (it == vocab_.sets.end()) throw DesugarError("unknown object set '" + f.domain_name + "'");
        domain = it->second;
      }
    } else {
      domain = f.domain;
    }
    for (auto& d : domain) d = vocab_.objects[object(d)];

    std::vector<FormulaPtr> kids;
    std::vector<std::size_t> choice(f.binders.size(), 0);
    if (!domain.empty()) {
      while (true) {
        for (std::size_t i = 0; i < f.binders.size(); ++i) env_.emplace_back(f.binders[i], domain[choice[i]]);
        kids.push_back(run(f.kids[0]));
        env_.resize(env_.size() - f.binders.size());
        std::size_t i = f.binders.size();
        while (i > 0 && ++choice[i - 1] == domain.size()) choice[--i] = 0;
        if (i == 0) break;
      }
    }
    return make_nary(f.op == Op::ForAll ? Op::And : Op::Or, std::move(kids));
  }

  const Vocabulary& vocab_;
  std::vector<std::pair<std::string, std::string>> env_;
};

}  // namespace

FormulaPtr desugar(const FormulaPtr& f, const Vocabulary& vocab) { return Desugarer(vocab).run(f); }

// ---------------------------------------------------------------------------
// Normal forms

namespace {

Op dual(Op op) {
  switch (op) {
    case Op::And: return Op::Or;
    case Op::Or: return Op::And;
    case Op::Next: return Op::WeakNext;
    case Op::WeakNext: return Op::Next;
    case Op::Always: return Op::Eventually;
    case Op::Eventually: return Op::Always;
    case Op::Until: return Op::Release;
    case Op::Release: return Op::Until;
    case Op::Prev: return Op::WeakPrev;
    case Op::WeakPrev: return Op::Prev;
    case Op::AlwaysPast: return Op::EventuallyPast;
    case Op::EventuallyPast: return Op::AlwaysPast;
    case Op::Since: return Op::Trigger;
    case Op::Trigger: return Op::Since;
    default: throw std::invalid_argument("operator has no dual");
  }
}

FormulaPtr push_negation(const FormulaPtr& f, bool negate) {
  switch (f->op) {
    case Op::True: return negate ? make_false() : f;
    case Op::Atom:
      if (!f->resolved_atom()) throw std::invalid_argument("nnf needs a desugared formula");
      return negate ? make_resolved_atom(f->obj_a, f->obj_b, f->relation, !f->positive, f->a, f->b,
                                         f->relation_names.empty() ? "" : f->relation_names[0])
                    : f;
    case Op::Not: return push_negation(f->kids[0], !negate);
    case Op::Implies:
      return make_nary(negate ? Op::And : Op::Or,
                       {push_negation(f->kids[0], !negate), push_negation(f->kids[1], negate)});
    case Op::And:
    case Op::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(push_negation(k, negate));
      return make_nary(negate ? dual(f->op) : f->op, std::move(kids));
    }
    case Op::Member:
    case Op::SameObject:
    case Op::Ite:
    case Op::ForAll:
    case Op::Exists: throw std::invalid_argument("nnf needs a desugared formula");
    default: {
      const Op op = negate ? dual(f->op) : f->op;
      if (f->kids.size() == 1) return make_unary(op, push_negation(f->kids[0], negate));
      return make_binary(op, push_negation(f->kids[0], negate), push_negation(f->kids[1], negate));
    }
  }
}

}  // namespace

FormulaPtr nnf(const FormulaPtr& f) {
  if (contains_future_ops(*f) && contains_past_ops(*f))
    throw std::invalid_argument("formula mixes past and future operators");
  return push_negation(f, false);
}

bool is_nnf(const Formula& f) {
  switch (f.op) {
    case Op::Not: return f.kids[0]->op == Op::True;
    case Op::Implies:
    case Op::Member:
    case Op::SameObject:
    case Op::Ite:
    case Op::ForAll:
    case Op::Exists: return false;
    default:
      return std::all_of(f.kids.begin(), f.kids.end(), [](const FormulaPtr& k) { return is_nnf(*k); });
  }
}

FormulaPtr mirror(const FormulaPtr& f) {
  auto flip = [](Op op) {
    switch (op) {
      case Op::Next: return Op::Prev;
      case Op::WeakNext: return Op::WeakPrev;
      case Op::Always: return Op::AlwaysPast;
      case Op::Eventually: return Op::EventuallyPast;
      case Op::Until: return Op::Since;
      case Op::Release: return Op::Trigger;
      case Op::Prev: return Op::Next;
      case Op::WeakPrev: return Op::WeakNext;
      case Op::AlwaysPast: return Op::Always;
      case Op::EventuallyPast: return Op::Eventually;
      case Op::Since: return Op::Until;
      case Op::Trigger: return Op::Release;
      default: return op;
    }
  };
  if (f->kids.empty()) return f;
  std::vector<FormulaPtr> kids;
  for (const auto& k : f->kids) kids.push_back(mirror(k));
  Formula copy = *f;
  copy.op = flip(f->op);
  copy.kids = std::move(kids);
  return finish(std::move(copy));
}

// ---------------------------------------------------------------------------
// Evaluation

Trace Trace::reversed() const {
  Trace r(objects, length);
  for (int t = 0; t < length; ++t)
    for (int a = 0; a < objects; ++a)
      for (int b = 0; b < objects; ++b) r.at(a, b, length - 1 - t) = at(a, b, t);
  return r;
}

bool eval(const Formula& f, const Trace& tr, int s, int t, Direction dir) {
  if (dir == Direction::Future ? is_past_op(f.op) : is_future_op(f.op))
    throw std::invalid_argument("operator of the wrong direction in " + f.key);
  auto sub = [&](int k, int lo, int hi) { return eval(*f.kids[k], tr, lo, hi, dir); };
  switch (f.op) {
    case Op::True: return true;
    case Op::Atom: {
      if (!f.resolved_atom()) throw std::invalid_argument("eval needs a desugared formula");
      const int at = dir == Direction::Future ? s : t;
      return (tr.at(f.obj_a, f.obj_b, at) == f.relation) == f.positive;
    }
    case Op::Not: return !sub(0, s, t);
    case Op::And:
      for (std::size_t k = 0; k < f.kids.size(); ++k)
        if (!sub(int(k), s, t)) return false;
      return true;
    case Op::Or:
      for (std::size_t k = 0; k < f.kids.size(); ++k)
        if (sub(int(k), s, t)) return true;
      return false;
    case Op::Implies: return !sub(0, s, t) || sub(1, s, t);

    case Op::Next: return s + 1 <= t && sub(0, s + 1, t);
    case Op::WeakNext: return s == t || sub(0, s + 1, t);
    case Op::Always:
      for (int r = s; r <= t; ++r)
        if (!sub(0, r, t)) return false;
      return true;
    case Op::Eventually:
      for (int r = s; r <= t; ++r)
        if (sub(0, r, t)) return true;
      return false;
    case Op::Until:
      for (int r = s; r <= t; ++r) {
        if (sub(1, r, t)) return true;
        if (!sub(0, r, t)) return false;
      }
      return false;
    case Op::Release:
      for (int r = s; r <= t; ++r) {
        if (!sub(1, r, t)) return false;
        if (sub(0, r, t)) return true;
      }
      return true;

    case Op::Prev: return s <= t - 1 && sub(0, s, t - 1);
    case Op::WeakPrev: return s == t || sub(0, s, t - 1);
    case Op::AlwaysPast:
      for (int r = s; r <= t; ++r)
        if (!sub(0, s, r)) return false;
      return true;
    case Op::EventuallyPast:
      for (int r = s; r <= t; ++r)
        if (sub(0, s, r)) return true;
      return false;
    case Op::Since:
      for (int r = t; r >= s; --r) {
        if (sub(1, s, r)) return true;
        if (!sub(0, s, r)) return false;
      }
      return false;
    case Op::Trigger:
      for (int r = t; r >= s; --r) {
        if (!sub(1, s, r)) return false;
        if (sub(0, s, r)) return true;
      }
      return true;

    default: throw std::invalid_argument("eval needs a desugared formula: " + f.key);
  }
}

}  // namespace qsim::temporal
