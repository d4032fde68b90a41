// Human-readable and JSON renderings of traces and simulation results, and
// reading traces back for the trace checker.
#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qsim/scenario.hpp"
#include "qsim/simulate.hpp"
#include "qsim/validate.hpp"

namespace qsim::report {

/// Settings echoed into structured output.
struct RunConfig {
  std::string scenario;
  std::string command;
  bool timings = false;  // wall times make the document run-dependent
};

/// {"objects": [...], "calculus": name, "stages": [[[rel, ...], ...], ...]}
/// where stages[t][a][b] names Q[a,b,t].
nlohmann::json trace_json(const Scenario& sc, const temporal::Trace& trace);

nlohmann::json horizon_json(const simulate::HorizonStats& h, bool timings);
nlohmann::json result_json(const Scenario& sc, const simulate::SimulationResult& r, const RunConfig& cfg);
nlohmann::json enumerate_json(const Scenario& sc, const simulate::EnumerateResult& r, const RunConfig& cfg);
nlohmann::json check_json(const TraceReport& r);

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepts a trace document or a result document with a "trace" member.
temporal::Trace read_trace(const Scenario& sc, const nlohmann::json& doc);

/// One line per stage listing the relations of the pairs a < b.
void print_trace(std::ostream& out, const Scenario& sc, const temporal::Trace& trace);
void print_result(std::ostream& out, const Scenario& sc, const simulate::SimulationResult& r, bool timings);
void print_check(std::ostream& out, const TraceReport& r);

}  // namespace qsim::report
