// Command-line front end: solve, enumerate, validate-calculus, check-trace.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qsim/calculus.hpp"
#include "qsim/report.hpp"
#include "qsim/scenario.hpp"
#include "qsim/simulate.hpp"
#include "qsim/validate.hpp"

namespace {

using namespace qsim;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;

struct Args {
  std::string command;
  std::string scenario;
  std::string calculus;
  std::string trace;
  std::string translation;
  std::string heuristic;
  std::string format = "text";
  int horizon = -1;
  std::int64_t max_steps = -1;
  std::size_t limit = 100;
  std::int64_t node_budget = -2;
  double time_budget = -1;
  bool no_non_circularity = false;
  int threads = 1;
  bool timings = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario load(const Args& a) {
  if (a.scenario.empty()) throw UsageError("--scenario is required for " + a.command);
  Scenario sc = [&] {
    if (auto b = builtin_scenario(a.scenario)) return std::move(*b);
    return load_scenario_file(a.scenario);
  }();
  auto& o = sc.options;
  if (a.translation == "unfold") o.translation = translate::Mode::Unfold;
  if (a.translation == "array") o.translation = translate::Mode::Array;
  if (a.heuristic == "default") o.heuristic = Heuristic::Default;
  if (a.heuristic == "tractable") o.heuristic = Heuristic::Tractable;
  if (a.max_steps >= 0) o.max_steps = a.max_steps;
  if (a.node_budget >= -1) o.node_budget = a.node_budget;
  if (a.time_budget >= 0) o.time_budget = a.time_budget;
  if (a.no_non_circularity) o.non_circular = false;
  return sc;
}

bool structured(const Args& a) { return a.format == "structured"; }

int solve(const Args& a) {
  const Scenario sc = load(a);
  const auto r = a.threads > 1 ? simulate::simulate_parallel(sc, a.threads) : simulate::simulate(sc);
  if (structured(a))
    std::cout << report::result_json(sc, r, {a.scenario, a.command, a.timings}).dump(2) << "\n";
  else
    report::print_result(std::cout, sc, r, a.timings);
  return r.status == simulate::Status::Solution ? kOk : kNegative;
}

int enumerate(const Args& a) {
  if (a.horizon < 1) throw UsageError("enumerate needs --horizon N (number of stages, N >= 1)");
  const Scenario sc = load(a);
  const auto r = simulate::enumerate(sc, a.horizon, a.limit);
  if (structured(a)) {
    std::cout << report::enumerate_json(sc, r, {a.scenario, a.command, a.timings}).dump(2) << "\n";
  } else {
    std::cout << r.traces.size() << " simulation(s) with " << a.horizon << " stages";
    if (r.limit_reached) std::cout << " (limit reached)";
    if (r.exhausted) std::cout << " (budget exhausted)";
    std::cout << "\n";
    for (std::size_t i = 0; i < r.traces.size(); ++i) {
      std::cout << "# " << i + 1 << "\n";
      report::print_trace(std::cout, sc, r.traces[i]);
    }
  }
  return r.traces.empty() ? kNegative : kOk;
}

int validate_calculus(const Args& a) {
  if (a.calculus.empty()) throw UsageError("validate-calculus needs --calculus NAME|PATH");
  std::optional<Calculus> loaded;
  const Calculus* c = find_builtin_calculus(a.calculus);
  if (!c) {
    loaded = load_calculus(read_file(a.calculus)).calculus;
    c = &*loaded;
  }
  const auto violations = validate(*c);
  if (structured(a)) {
    json v = json::array();
    for (const auto& x : violations) v.push_back({{"axiom", x.axiom}, {"witness", x.witness}});
    std::cout << json{{"calculus", c->name()}, {"valid", violations.empty()}, {"violations", v}}.dump(2) << "\n";
  } else {
    std::cout << c->name() << ": " << (violations.empty() ? "valid" : "invalid") << "\n";
    for (const auto& x : violations) std::cout << "  " << x.axiom << ": " << x.witness << "\n";
  }
  return violations.empty() ? kOk : kNegative;
}

int check_trace(const Args& a) {
  if (a.trace.empty()) throw UsageError("check-trace needs --trace PATH");
  const Scenario sc = load(a);
  json doc;
  try {
    doc = json::parse(read_file(a.trace));
  } catch (const json::parse_error& e) {
    throw UsageError(a.trace + ": " + e.what());
  }
  const auto tr = report::read_trace(sc, doc);
  const auto r = check_trace(sc, tr);
  if (structured(a))
    std::cout << report::check_json(r).dump(2) << "\n";
  else
    report::print_check(std::cout, r);
  return r.ok() ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qualitative simulation with temporal constraints"};
  Args a;
  app.add_option("--command,command", a.command, "solve | enumerate | validate-calculus | check-trace")
      ->required()
      ->check(CLI::IsMember({"solve", "enumerate", "validate-calculus", "check-trace"}));
  app.add_option("--scenario,scenario", a.scenario, "scenario file or builtin name (navigation, piano, phagocytosis)");
  app.add_option("--calculus", a.calculus, "calculus file or builtin name, for validate-calculus");
  app.add_option("--trace", a.trace, "trace or result document, for check-trace");
  app.add_option("--translation", a.translation, "unfold | array")->check(CLI::IsMember({"unfold", "array"}));
  app.add_option("--heuristic", a.heuristic, "default | tractable")->check(CLI::IsMember({"default", "tractable"}));
  app.add_option("--horizon", a.horizon, "number of stages, for enumerate");
  app.add_option("--max-steps", a.max_steps, "t_max override");
  app.add_option("--limit", a.limit, "maximum number of enumerated simulations");
  app.add_option("--node-budget", a.node_budget, "search nodes per horizon (-1: unlimited)");
  app.add_option("--time-budget", a.time_budget, "seconds for the whole run");
  app.add_option("--format", a.format, "text | structured")->check(CLI::IsMember({"text", "structured"}));
  app.add_flag("--no-non-circularity", a.no_non_circularity, "allow repeated stages");
  app.add_option("--threads", a.threads, "horizons decided concurrently by solve");
  app.add_flag("--timings", a.timings, "include wall times in the output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (a.command == "solve") return solve(a);
    if (a.command == "enumerate") return enumerate(a);
    if (a.command == "validate-calculus") return validate_calculus(a);
    return check_trace(a);
  } catch (const UsageError& e) {
    std::cerr << "qsim: " << e.what() << "\n";
  } catch (const ScenarioError& e) {
    std::cerr << "qsim: scenario: " << e.what() << "\n";
  } catch (const CalculusError& e) {
    std::cerr << "qsim: calculus: " << e.what() << "\n";
  } catch (const report::TraceFormatError& e) {
    std::cerr << "qsim: trace: " << e.what() << "\n";
  } catch (const std::overflow_error& e) {
    std::cerr << "qsim: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "qsim: " << e.what() << "\n";
  }
  return kUsage;
}
