// Qualitative simulation: staged CSP construction, neighbourhood linking,
// rule imposition and the iterative horizon search for a shortest simulation.
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsim/csp.hpp"
#include "qsim/scenario.hpp"
#include "qsim/temporal.hpp"
#include "qsim/translate.hpp"

namespace qsim::simulate {

/// Store for a fixed number of stages plus the variable layout.
struct Model {
  csp::Store store;
  translate::StageSpace space;
  int stages = 0;
};

struct Stage {
  int t = 0;
  std::vector<csp::VarId> array;  // [a * objects + b]
};

/// Creates Q[A,B,t] for all ordered pairs and posts reflexivity, converse,
/// composition, the stage-0 initial restrictions and the intra formulas.
Stage build_stage(const Scenario& sc, int t, Model& m, translate::Translator& tr);

/// Q[A,B,t] → Q[A,B,t+1] stays or moves to a conceptual neighbour.
void link_stages(const Scenario& sc, int t, Model& m);

/// Any two stages differ in at least one pair.
void non_circularity(const Scenario& sc, Model& m);

/// Builds the full model for `stages` stages: stages, links, rules,
/// non-circularity and change limits; goal and final formulas are added when
/// `with_final` is set.
Model build_model(const Scenario& sc, int stages, bool with_final);

/// |O| (|O| − 1) 2^{|Q|−1}, or the scenario override. Throws std::overflow_error
/// when the value exceeds `cap` and no override is set.
std::int64_t default_tmax(const Scenario& sc, std::int64_t cap = 1'000'000);

csp::Branching branching_for(const Scenario& sc);

enum class Status : std::uint8_t { Solution, NoSolutionWithinTmax, BudgetExhausted };
const char* status_name(Status s);

struct HorizonStats {
  int stages = 0;
  bool consistent = false;  // propagation of the rule system succeeded
  csp::SearchStatus outcome = csp::SearchStatus::NoSolution;
  std::int64_t nodes = 0;
  std::int64_t backtracks = 0;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  double seconds = 0;
};

struct SimulationResult {
  Status status = Status::NoSolutionWithinTmax;
  temporal::Trace trace;  // when Solution
  int num_transitions = -1;
  std::int64_t tmax = 0;
  std::vector<HorizonStats> horizons;
  double seconds = 0;
};

/// Reads the stage arrays out of a solution of build_model.
temporal::Trace extract_trace(const Model& m, const csp::Solution& sol);

/// Solves one horizon.
HorizonStats solve_horizon(const Scenario& sc, int stages, const csp::SearchLimits& limits,
                           std::optional<temporal::Trace>& trace);

/// Tries 1, 2, ... stages in order and returns the first success, which is a
/// shortest simulation.
SimulationResult simulate(const Scenario& sc);

/// Same result as simulate(), deciding `threads` horizons concurrently.
SimulationResult simulate_parallel(const Scenario& sc, int threads = 0);

struct EnumerateResult {
  std::vector<temporal::Trace> traces;
  bool limit_reached = false;
  bool exhausted = false;
  HorizonStats stats;
};

/// All simulations with exactly `stages` stages, up to `limit`.
EnumerateResult enumerate(const Scenario& sc, int stages, std::size_t limit);

}  // namespace qsim::simulate
