#include "qsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "qsim/embedded_data.hpp"

namespace qsim {

using temporal::FormulaPtr;
using temporal::InterStateRule;
using temporal::Op;

int Scenario::object_index(std::string_view n) const {
  auto it = std::find(objects.begin(), objects.end(), n);
  return it == objects.end() ? -1 : static_cast<int>(it - objects.begin());
}

temporal::Vocabulary Scenario::vocabulary() const { return {objects, calculus.get(), sets}; }

namespace {

FormulaPtr desugared(const Scenario& s, const FormulaPtr& f) {
  try {
    return temporal::desugar(f, s.vocabulary());
  } catch (const temporal::DesugarError& e) {
    throw ScenarioError(std::string(e.what()) + " in '" + f->key + "'");
  }
}

FormulaPtr parsed(std::string_view text) {
  try {
    return temporal::parse_formula(text);
  } catch (const temporal::ParseError& e) {
    throw ScenarioError(std::string(e.what()) + " in '" + std::string(text) + "'");
  }
}

ScenarioFormula section_formula(const Scenario& s, std::string_view text, bool allow_future, bool allow_past,
                                const char* section) {
  FormulaPtr f = desugared(s, parsed(text));
  if (!allow_future && temporal::contains_future_ops(*f))
    throw ScenarioError(std::string(section) + " formula uses a future operator: '" + std::string(text) + "'");
  if (!allow_past && temporal::contains_past_ops(*f))
    throw ScenarioError(std::string(section) + " formula uses a past operator: '" + std::string(text) + "'");
  return {std::string(text), f};
}

void normalize(const FormulaPtr& f, std::vector<FormulaPtr>& cond, const std::string& label,
               std::vector<InterStateRule>& out) {
  switch (f->op) {
    case Op::Next: {
      InterStateRule r{temporal::make_nary(Op::And, cond), f->kids[0], label};
      if (temporal::contains_future_ops(*r.past))
        throw ScenarioError("condition of rule '" + label + "' uses a future operator");
      if (temporal::contains_past_ops(*r.future))
        throw ScenarioError("consequence of rule '" + label + "' uses a past operator");
      out.push_back(std::move(r));
      return;
    }
    case Op::Ite:
      cond.push_back(f->kids[0]);
      normalize(f->kids[1], cond, label, out);
      cond.back() = temporal::make_not(f->kids[0]);
      normalize(f->kids[2], cond, label, out);
      cond.pop_back();
      return;
    case Op::Implies:
      cond.push_back(f->kids[0]);
      normalize(f->kids[1], cond, label, out);
      cond.pop_back();
      return;
    case Op::And:
      for (const auto& k : f->kids) normalize(k, cond, label, out);
      return;
    default:
      throw ScenarioError("rule '" + label +
                          "' must be 'past => future' or built from X, ite, -> and & around X");
  }
}

}  // namespace

std::vector<InterStateRule> normalize_rule(const FormulaPtr& f, const std::string& label) {
  std::vector<FormulaPtr> cond;
  std::vector<InterStateRule> out;
  normalize(f, cond, label, out);
  return out;
}

void add_initial(Scenario& s, std::string_view text) {
  s.initial.push_back(section_formula(s, text, false, true, "initial"));
}

void add_intra(Scenario& s, std::string_view text) {
  s.intra.push_back(section_formula(s, text, false, false, "intra"));
}

void add_goal(Scenario& s, std::string_view text) {
  s.goal.push_back(section_formula(s, text, true, false, "goal"));
}

void add_final(Scenario& s, std::string_view text) {
  s.final.push_back(section_formula(s, text, false, true, "final"));
}

void add_rule(Scenario& s, std::string_view text) {
  std::vector<InterStateRule> rules;
  if (text.find("=>") != std::string_view::npos) {
    try {
      rules.push_back(temporal::parse_rule(text));
    } catch (const temporal::ParseError& e) {
      throw ScenarioError(std::string(e.what()) + " in rule '" + std::string(text) + "'");
    }
  } else {
    rules = normalize_rule(parsed(text), std::string(text));
  }
  for (auto& r : rules) {
    r.past = desugared(s, r.past);
    r.future = desugared(s, r.future);
    s.rules.push_back(std::move(r));
  }
}

void add_invariant(Scenario& s, std::string_view text) {
  FormulaPtr f = desugared(s, parsed(text));
  if (temporal::contains_future_ops(*f) || temporal::contains_past_ops(*f))
    throw ScenarioError("invariant must be a state formula: '" + std::string(text) + "'");
  s.rules.push_back({f, temporal::make_unary(Op::Always, f), "invariant " + std::string(text)});
}

namespace {

std::vector<std::string> string_list(const YAML::Node& n, const char* what) {
  if (!n) return {};
  if (!n.IsSequence()) throw ScenarioError(std::string(what) + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : n) {
    if (!item.IsScalar()) throw ScenarioError(std::string(what) + " entries must be strings");
    out.push_back(item.as<std::string>());
  }
  return out;
}

std::shared_ptr<const Calculus> resolve_calculus(const std::string& ref, const std::filesystem::path& base) {
  if (const Calculus* c = find_builtin_calculus(ref))
    return std::shared_ptr<const Calculus>(c, [](const Calculus*) {});
  std::filesystem::path p(ref);
  if (p.is_relative() && !base.empty()) p = base / p;
  std::ifstream in(p);
  if (!in) throw ScenarioError("calculus '" + ref + "' is neither builtin nor a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return std::make_shared<const Calculus>(load_calculus(buf.str()).calculus);
  } catch (const CalculusError& e) {
    throw ScenarioError(p.string() + ": " + e.what());
  }
}

void read_options(const YAML::Node& n, ScenarioOptions& o) {
  if (!n) return;
  if (!n.IsMap()) throw ScenarioError("options must be a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "non_circular") {
      o.non_circular = v.as<bool>();
    } else if (key == "max_steps") {
      o.max_steps = v.as<std::int64_t>();
    } else if (key == "translation") {
      const auto m = v.as<std::string>();
      if (m == "unfold") o.translation = translate::Mode::Unfold;
      else if (m == "array") o.translation = translate::Mode::Array;
      else throw ScenarioError("translation must be 'unfold' or 'array'");
    } else if (key == "heuristic") {
      const auto h = v.as<std::string>();
      if (h == "default") o.heuristic = Heuristic::Default;
      else if (h == "tractable") o.heuristic = Heuristic::Tractable;
      else throw ScenarioError("heuristic must be 'default' or 'tractable'");
    } else if (key == "max_changes_per_step") {
      o.max_changes_per_step = v.as<int>();
    } else if (key == "node_budget") {
      o.node_budget = v.as<std::int64_t>();
    } else if (key == "time_budget") {
      o.time_budget = v.as<double>();
    } else {
      throw ScenarioError("unknown option '" + key + "'");
    }
  }
}

}  // namespace

Scenario load_scenario(std::string_view yaml, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ScenarioError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ScenarioError("scenario must be a YAML mapping");

  static const std::set<std::string> kKeys = {"name",  "objects", "calculus", "sets",  "initial", "intra",
                                              "rules", "invariants", "goal",  "final", "options"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKeys.count(key)) throw ScenarioError("unknown section '" + key + "'");
  }

  Scenario s;
  try {
    s.name = root["name"] ? root["name"].as<std::string>() : "scenario";
    s.objects = string_list(root["objects"], "objects");
    if (s.objects.empty()) throw ScenarioError("scenario has no objects");
    for (std::size_t i = 0; i < s.objects.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (s.objects[i] == s.objects[j]) throw ScenarioError("duplicate object '" + s.objects[i] + "'");
    if (!root["calculus"]) throw ScenarioError("scenario has no calculus");
    s.calculus = resolve_calculus(root["calculus"].as<std::string>(), base_dir);

    if (const auto sets = root["sets"]) {
      if (!sets.IsMap()) throw ScenarioError("sets must be a mapping");
      for (const auto& kv : sets) {
        const auto name = kv.first.as<std::string>();
        auto members = string_list(kv.second, "set");
        for (const auto& m : members)
          if (s.object_index(m) < 0) throw ScenarioError("set '" + name + "' names unknown object '" + m + "'");
        s.sets[name] = std::move(members);
      }
    }
    read_options(root["options"], s.options);

    for (const auto& t : string_list(root["initial"], "initial")) add_initial(s, t);
    for (const auto& t : string_list(root["intra"], "intra")) add_intra(s, t);
    for (const auto& t : string_list(root["rules"], "rules")) add_rule(s, t);
    for (const auto& t : string_list(root["invariants"], "invariants")) add_invariant(s, t);
    for (const auto& t : string_list(root["goal"], "goal")) add_goal(s, t);
    for (const auto& t : string_list(root["final"], "final")) add_final(s, t);
  } catch (const YAML::Exception& e) {
    throw ScenarioError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), path.parent_path());
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "navigation") return load_scenario(embedded::kNavigationScenario);
  if (name == "piano") return load_scenario(embedded::kPianoScenario);
  if (name == "phagocytosis") return load_scenario(embedded::kPhagocytosisScenario);
  return std::nullopt;
}

std::vector<std::string> builtin_scenario_names() { return {"navigation", "piano", "phagocytosis"}; }

}  // namespace qsim
