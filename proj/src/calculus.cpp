#include "qsim/calculus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "qsim/embedded_data.hpp"

namespace qsim {

std::vector<int> RelationSet::members() const {
  std::vector<int> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

CalculusParseError::CalculusParseError(int line, int column, const std::string& message)
    : CalculusError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

Calculus::Calculus(std::string name, std::vector<std::string> relations, int identity,
                   std::vector<int> converse, std::vector<RelationSet> composition,
                   std::vector<std::pair<int, int>> neighbourhood,
                   std::vector<RelationSet> tractable_subclass)
    : name_(std::move(name)),
      relations_(std::move(relations)),
      identity_(identity),
      converse_(std::move(converse)),
      composition_(std::move(composition)),
      tractable_(std::move(tractable_subclass)) {
  const int n = size();
  if (n == 0) throw CalculusError("calculus '" + name_ + "' has no relations");
  if (n > kMaxRelations)
    throw CalculusError("calculus '" + name_ + "' has more than 64 relations");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (relations_[i] == relations_[j])
        throw CalculusError("duplicate relation name '" + relations_[i] + "'");
  if (identity_ < 0 || identity_ >= n) throw CalculusError("identity out of range");
  if (static_cast<int>(converse_.size()) != n) throw CalculusError("converse table is not total");
  for (int r : converse_)
    if (r < 0 || r >= n) throw CalculusError("converse entry out of range");
  if (static_cast<int>(composition_.size()) != n * n)
    throw CalculusError("composition table is not total");
  const RelationSet universe = all();
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      const RelationSet cell = composition_[r * n + s];
      if (cell.empty())
        throw CalculusError("empty composition cell " + relations_[r] + " ; " + relations_[s]);
      if (!cell.subset_of(universe)) throw CalculusError("composition cell out of range");
    }
  neighbours_.assign(n, RelationSet{});
  for (auto [a, b] : neighbourhood) {
    if (a < 0 || a >= n || b < 0 || b >= n) throw CalculusError("neighbourhood edge out of range");
    neighbours_[a].insert(b);
  }
  for (RelationSet s : tractable_)
    if (s.empty() || !s.subset_of(universe))
      throw CalculusError("tractable subclass entry out of range");
}

std::optional<int> Calculus::index_of(std::string_view relation) const {
  for (int i = 0; i < size(); ++i)
    if (relations_[i] == relation) return i;
  return std::nullopt;
}

std::vector<std::pair<int, int>> Calculus::neighbourhood_edges() const {
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < size(); ++r)
    for (int s : neighbours_[r].members())
      if (r < s) edges.emplace_back(r, s);
  return edges;
}

std::vector<Violation> validate(const Calculus& c) {
  std::vector<Violation> out;
  const int n = c.size();
  auto nm = [&](int r) { return c.relation_name(r); };
  auto set_str = [&](RelationSet s) {
    std::string txt = "{";
    bool first = true;
    for (int r : s.members()) {
      txt += (first ? "" : ", ") + nm(r);
      first = false;
    }
    return txt + "}";
  };

  for (int r = 0; r < n; ++r)
    if (c.converse(c.converse(r)) != r)
      out.push_back({"converse involution",
                     "conv(conv(" + nm(r) + ")) = " + nm(c.converse(c.converse(r)))});

  const int id = c.identity();
  if (c.converse(id) != id)
    out.push_back({"converse of identity", "conv(" + nm(id) + ") = " + nm(c.converse(id))});

  for (int r = 0; r < n; ++r) {
    if (c.compose(id, r) != RelationSet::single(r))
      out.push_back({"identity law", nm(id) + " ; " + nm(r) + " = " + set_str(c.compose(id, r))});
    if (c.compose(r, id) != RelationSet::single(r))
      out.push_back({"identity law", nm(r) + " ; " + nm(id) + " = " + set_str(c.compose(r, id))});
  }

  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        const bool lhs = c.compose(r, s).contains(t);
        const bool rhs = c.compose(c.converse(s), c.converse(r)).contains(c.converse(t));
        if (lhs != rhs)
          out.push_back({"converse-composition coherence",
                         "(" + nm(r) + ", " + nm(s) + ", " + nm(t) + ")"});
      }

  for (int r = 0; r < n; ++r) {
    if (c.adjacent(r, r)) out.push_back({"neighbourhood irreflexive", nm(r) + " -- " + nm(r)});
    for (int s = 0; s < n; ++s)
      if (c.adjacent(r, s) && !c.adjacent(s, r))
        out.push_back({"neighbourhood symmetric", nm(r) + " -- " + nm(s) + " without converse edge"});
  }
  return out;
}

namespace {

struct Token {
  std::string text;
  int column;
};

// Splits a line into identifiers and the punctuation used by the format.
std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char ch = line[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    const int col = static_cast<int>(i) + 1;
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'' || ch == '.') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_' ||
              line[j] == '\'' || line[j] == '.'))
        ++j;
      out.push_back({std::string(line.substr(i, j - i)), col});
      i = j;
    } else if (line.substr(i, 2) == "->" || line.substr(i, 2) == "--") {
      out.push_back({std::string(line.substr(i, 2)), col});
      i += 2;
    } else if (ch == '{' || ch == '}' || ch == ',' || ch == ';' || ch == ':') {
      out.push_back({std::string(1, ch), col});
      ++i;
    } else {
      throw CalculusParseError(line_no, col, std::string("unexpected character '") + ch + "'");
    }
  }
  return out;
}

class CalculusReader {
 public:
  explicit CalculusReader(std::string_view src) : src_(src) {}

  LoadedCalculus read() {
    std::istringstream in{std::string(src_)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      auto toks = tokenize(line, line_no);
      if (toks.empty()) continue;
      handle(toks, line_no);
    }
    return finish(line_no);
  }

 private:
  enum class Section { None, Converse, Composition, Neighbourhood, Tractable };

  [[noreturn]] static void fail(int line, int col, const std::string& msg) {
    throw CalculusParseError(line, col, msg);
  }

  int relation(const Token& t, int line) const {
    auto it = index_.find(t.text);
    if (it == index_.end()) fail(line, t.column, "unknown relation '" + t.text + "'");
    return it->second;
  }

  static void expect(const std::vector<Token>& toks, std::size_t i, std::string_view what, int line) {
    if (i >= toks.size()) fail(line, toks.empty() ? 1 : toks.back().column, "expected '" + std::string(what) + "'");
    if (toks[i].text != what)
      fail(line, toks[i].column, "expected '" + std::string(what) + "', found '" + toks[i].text + "'");
  }

  static void expect_end(const std::vector<Token>& toks, std::size_t i, int line) {
    if (i < toks.size()) fail(line, toks[i].column, "unexpected '" + toks[i].text + "'");
  }

  // Parses "{a, b, c}" starting at toks[i]; returns one past the closing brace.
  std::size_t relation_set(const std::vector<Token>& toks, std::size_t i, int line, RelationSet& out) const {
    expect(toks, i++, "{", line);
    out = RelationSet{};
    if (i < toks.size() && toks[i].text == "}") return i + 1;
    while (true) {
      if (i >= toks.size()) fail(line, toks.back().column, "unterminated relation set");
      out.insert(relation(toks[i++], line));
      if (i >= toks.size()) fail(line, toks.back().column, "unterminated relation set");
      if (toks[i].text == "}") return i + 1;
      expect(toks, i++, ",", line);
    }
  }

  void require_relations(const Token& t, int line) const {
    if (names_.empty()) fail(line, t.column, "'relations:' must precede tables");
  }

  void handle(const std::vector<Token>& toks, int line) {
    const std::string& head = toks[0].text;
    const bool is_header = toks.size() >= 2 && toks[1].text == ":";
    if (head == "calculus" && toks.size() == 2 && toks[1].text != ":") {
      name_ = toks[1].text;
      section_ = Section::None;
      return;
    }
    if (is_header && head == "relations") {
      if (!names_.empty()) fail(line, toks[0].column, "duplicate 'relations:'");
      for (std::size_t i = 2; i < toks.size(); ++i) {
        if (toks[i].text == "," ) continue;
        if (index_.count(toks[i].text)) fail(line, toks[i].column, "duplicate relation '" + toks[i].text + "'");
        index_[toks[i].text] = static_cast<int>(names_.size());
        names_.push_back(toks[i].text);
      }
      if (names_.empty()) fail(line, toks[0].column, "empty relation list");
      if (names_.size() > Calculus::kMaxRelations) fail(line, toks[0].column, "more than 64 relations");
      const std::size_t n = names_.size();
      converse_.assign(n, -1);
      composition_.assign(n * n, RelationSet{});
      composition_seen_.assign(n * n, false);
      section_ = Section::None;
      return;
    }
    if (is_header && head == "identity") {
      require_relations(toks[0], line);
      if (toks.size() != 3) fail(line, toks[0].column, "expected 'identity: <relation>'");
      identity_ = relation(toks[2], line);
      section_ = Section::None;
      return;
    }
    if (is_header && toks.size() == 2) {
      require_relations(toks[0], line);
      if (head == "converse") section_ = Section::Converse;
      else if (head == "composition") section_ = Section::Composition;
      else if (head == "neighbourhood" || head == "neighborhood") {
        section_ = Section::Neighbourhood;
        has_neighbourhood_ = true;
      } else if (head == "tractable") section_ = Section::Tractable;
      else fail(line, toks[0].column, "unknown section '" + head + "'");
      return;
    }

    switch (section_) {
      case Section::Converse: {
        const int r = relation(toks[0], line);
        expect(toks, 1, "->", line);
        if (toks.size() < 3) fail(line, toks[1].column, "missing converse target");
        const int s = relation(toks[2], line);
        expect_end(toks, 3, line);
        if (converse_[r] != -1) fail(line, toks[0].column, "duplicate converse for '" + toks[0].text + "'");
        converse_[r] = s;
        return;
      }
      case Section::Composition: {
        const int r = relation(toks[0], line);
        expect(toks, 1, ";", line);
        if (toks.size() < 3) fail(line, toks[1].column, "missing second relation");
        const int s = relation(toks[2], line);
        expect(toks, 3, "->", line);
        RelationSet cell;
        const std::size_t end = relation_set(toks, 4, line, cell);
        expect_end(toks, end, line);
        const std::size_t k = static_cast<std::size_t>(r) * names_.size() + s;
        if (composition_seen_[k]) fail(line, toks[0].column, "duplicate composition cell");
        if (cell.empty()) fail(line, toks[4].column, "empty composition cell");
        composition_seen_[k] = true;
        composition_[k] = cell;
        return;
      }
      case Section::Neighbourhood: {
        const int r = relation(toks[0], line);
        expect(toks, 1, "--", line);
        if (toks.size() < 3) fail(line, toks[1].column, "missing neighbour");
        const int s = relation(toks[2], line);
        expect_end(toks, 3, line);
        edges_.emplace_back(r, s);
        edges_.emplace_back(s, r);
        return;
      }
      case Section::Tractable: {
        RelationSet set;
        const std::size_t end = relation_set(toks, 0, line, set);
        expect_end(toks, end, line);
        if (set.empty()) fail(line, toks[0].column, "empty tractable set");
        tractable_.push_back(set);
        return;
      }
      case Section::None:
        break;
    }
    fail(line, toks[0].column, "unexpected '" + head + "'");
  }

  LoadedCalculus finish(int last_line) {
    const int end = last_line + 1;
    if (name_.empty()) fail(end, 1, "missing 'calculus <name>' header");
    if (names_.empty()) fail(end, 1, "missing 'relations:'");
    if (identity_ < 0) fail(end, 1, "missing 'identity:'");
    const int n = static_cast<int>(names_.size());
    for (int r = 0; r < n; ++r)
      if (converse_[r] < 0) fail(end, 1, "no converse given for '" + names_[r] + "'");
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        if (!composition_seen_[r * n + s])
          fail(end, 1, "missing composition cell " + names_[r] + " ; " + names_[s]);

    std::vector<std::string> warnings;
    if (!has_neighbourhood_) {
      warnings.push_back("calculus '" + name_ +
                         "' has no neighbourhood section; using the complete graph");
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          if (r != s) edges_.emplace_back(r, s);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    Calculus calc(name_, names_, identity_, converse_, composition_, edges_, tractable_);
    auto violations = validate(calc);
    if (!violations.empty())
      throw CalculusError("calculus '" + name_ + "' violates " + violations.front().axiom + ": " +
                          violations.front().witness);
    return LoadedCalculus{std::move(calc), std::move(warnings)};
  }

  std::string_view src_;
  Section section_ = Section::None;
  std::string name_;
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  int identity_ = -1;
  std::vector<int> converse_;
  std::vector<RelationSet> composition_;
  std::vector<bool> composition_seen_;
  std::vector<std::pair<int, int>> edges_;
  bool has_neighbourhood_ = false;
  std::vector<RelationSet> tractable_;
};

}  // namespace

LoadedCalculus load_calculus(std::string_view source) { return CalculusReader(source).read(); }

std::string serialize(const Calculus& c) {
  std::ostringstream out;
  auto set_str = [&](RelationSet s) {
    std::string txt = "{";
    bool first = true;
    for (int r : s.members()) {
      txt += (first ? "" : ", ") + c.relation_name(r);
      first = false;
    }
    return txt + "}";
  };
  out << "calculus " << c.name() << "\n";
  out << "relations:";
  for (const auto& r : c.relation_names()) out << ' ' << r;
  out << "\nidentity: " << c.relation_name(c.identity()) << "\n\nconverse:\n";
  for (int r = 0; r < c.size(); ++r)
    out << "  " << c.relation_name(r) << " -> " << c.relation_name(c.converse(r)) << "\n";
  out << "\ncomposition:\n";
  for (int r = 0; r < c.size(); ++r)
    for (int s = 0; s < c.size(); ++s)
      out << "  " << c.relation_name(r) << " ; " << c.relation_name(s) << " -> "
          << set_str(c.compose(r, s)) << "\n";
  out << "\nneighbourhood:\n";
  for (auto [r, s] : c.neighbourhood_edges())
    out << "  " << c.relation_name(r) << " -- " << c.relation_name(s) << "\n";
  if (!c.tractable_subclass().empty()) {
    out << "\ntractable:\n";
    for (RelationSet s : c.tractable_subclass()) out << "  " << set_str(s) << "\n";
  }
  return out.str();
}

const Calculus& builtin_rcc8() {
  static const Calculus calc = load_calculus(embedded::kRcc8Table).calculus;
  return calc;
}

const Calculus& builtin_cardinal() {
  static const Calculus calc = load_calculus(embedded::kCardinalTable).calculus;
  return calc;
}

const Calculus* find_builtin_calculus(std::string_view name) {
  if (name == "rcc8" || name == "RCC8") return &builtin_rcc8();
  if (name == "cardinal") return &builtin_cardinal();
  return nullptr;
}

}  // namespace qsim
