// Simulation scenarios: objects, calculus, initial / intra-state / inter-state
// / goal / final constraints and options, read from YAML documents.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsim/calculus.hpp"
#include "qsim/temporal.hpp"
#include "qsim/translate.hpp"

namespace qsim {

enum class Heuristic : std::uint8_t { Default, Tractable };

struct ScenarioOptions {
  bool non_circular = true;
  std::optional<std::int64_t> max_steps;  // t_max override
  translate::Mode translation = translate::Mode::Array;
  Heuristic heuristic = Heuristic::Default;
  std::optional<int> max_changes_per_step;
  std::int64_t node_budget = -1;     // per horizon; negative: unlimited
  std::optional<double> time_budget;  // seconds, whole run
};

/// A formula as written and its desugared form.
struct ScenarioFormula {
  std::string text;
  temporal::FormulaPtr formula;
};

struct Scenario {
  std::string name;
  std::vector<std::string> objects;
  std::shared_ptr<const Calculus> calculus;
  std::map<std::string, std::vector<std::string>> sets;

  std::vector<ScenarioFormula> initial;  // past formulas on [0..0]
  std::vector<ScenarioFormula> intra;    // state formulas at every stage
  std::vector<temporal::InterStateRule> rules;
  std::vector<ScenarioFormula> goal;   // future formulas on [0..last]
  std::vector<ScenarioFormula> final;  // past formulas on [0..last]
  ScenarioOptions options;

  int object_index(std::string_view name) const;
  temporal::Vocabulary vocabulary() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a scenario document. Relative calculus paths are resolved against
/// `base_dir`.
Scenario load_scenario(std::string_view yaml, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

/// Bundled scenarios: "navigation", "piano", "phagocytosis".
std::optional<Scenario> builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

/// Turns a rule formula without `=>` into rules: X ψ, ite(a, x, y),
/// a -> x and conjunctions thereof are accepted.
std::vector<temporal::InterStateRule> normalize_rule(const temporal::FormulaPtr& f, const std::string& label);

/// Adds a formula to a section after desugaring it against the scenario.
void add_initial(Scenario& s, std::string_view text);
void add_intra(Scenario& s, std::string_view text);
void add_rule(Scenario& s, std::string_view text);
void add_invariant(Scenario& s, std::string_view text);
void add_goal(Scenario& s, std::string_view text);
void add_final(Scenario& s, std::string_view text);

}  // namespace qsim
