#include "qsim/report.hpp"

#include <ostream>

namespace qsim::report {

using nlohmann::json;

namespace {

const char* outcome_name(csp::SearchStatus s) {
  switch (s) {
    case csp::SearchStatus::Solution: return "solution";
    case csp::SearchStatus::NoSolution: return "no_solution";
    case csp::SearchStatus::Exhausted: return "exhausted";
  }
  return "?";
}

json options_json(const Scenario& sc) {
  const auto& o = sc.options;
  json j;
  j["non_circular"] = o.non_circular;
  j["translation"] = o.translation == translate::Mode::Array ? "array" : "unfold";
  j["heuristic"] = o.heuristic == Heuristic::Tractable ? "tractable" : "default";
  j["max_steps"] = o.max_steps ? json(*o.max_steps) : json(nullptr);
  j["max_changes_per_step"] = o.max_changes_per_step ? json(*o.max_changes_per_step) : json(nullptr);
  j["node_budget"] = o.node_budget;
  j["time_budget"] = o.time_budget ? json(*o.time_budget) : json(nullptr);
  return j;
}

json config_json(const Scenario& sc, const RunConfig& cfg) {
  return {{"scenario", cfg.scenario}, {"name", sc.name}, {"command", cfg.command}, {"options", options_json(sc)}};
}

}  // namespace

json trace_json(const Scenario& sc, const temporal::Trace& trace) {
  const Calculus& c = *sc.calculus;
  json stages = json::array();
  for (int t = 0; t < trace.length; ++t) {
    json rows = json::array();
    for (int a = 0; a < trace.objects; ++a) {
      json row = json::array();
      for (int b = 0; b < trace.objects; ++b) row.push_back(c.relation_name(trace.at(a, b, t)));
      rows.push_back(std::move(row));
    }
    stages.push_back(std::move(rows));
  }
  return {{"objects", sc.objects}, {"calculus", c.name()}, {"stages", std::move(stages)}};
}

json horizon_json(const simulate::HorizonStats& h, bool timings) {
  json j = {{"stages", h.stages},
            {"consistent", h.consistent},
            {"outcome", h.consistent ? outcome_name(h.outcome) : "inconsistent"},
            {"nodes", h.nodes},
            {"backtracks", h.backtracks},
            {"variables", h.variables},
            {"constraints", h.constraints}};
  if (timings) j["seconds"] = h.seconds;
  return j;
}

json result_json(const Scenario& sc, const simulate::SimulationResult& r, const RunConfig& cfg) {
  json j;
  j["config"] = config_json(sc, cfg);
  j["status"] = simulate::status_name(r.status);
  j["tmax"] = r.tmax;
  j["horizons"] = json::array();
  for (const auto& h : r.horizons) j["horizons"].push_back(horizon_json(h, cfg.timings));
  if (r.status == simulate::Status::Solution) {
    j["num_transitions"] = r.num_transitions;
    j["trace"] = trace_json(sc, r.trace);
  } else {
    j["num_transitions"] = nullptr;
    j["trace"] = nullptr;
  }
  if (cfg.timings) j["seconds"] = r.seconds;
  return j;
}

json enumerate_json(const Scenario& sc, const simulate::EnumerateResult& r, const RunConfig& cfg) {
  json j;
  j["config"] = config_json(sc, cfg);
  j["stages"] = r.stats.stages;
  j["count"] = r.traces.size();
  j["limit_reached"] = r.limit_reached;
  j["exhausted"] = r.exhausted;
  j["stats"] = horizon_json(r.stats, cfg.timings);
  j["traces"] = json::array();
  for (const auto& t : r.traces) j["traces"].push_back(trace_json(sc, t));
  return j;
}

json check_json(const TraceReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back({{"check", x.check}, {"detail", x.detail}});
  return {{"valid", r.ok()}, {"violations", std::move(v)}};
}

temporal::Trace read_trace(const Scenario& sc, const json& doc) {
  const json& d = doc.contains("trace") ? doc.at("trace") : doc;
  if (!d.is_object() || !d.contains("stages")) throw TraceFormatError("document has no trace");
  if (d.contains("objects") && d.at("objects") != json(sc.objects))
    throw TraceFormatError("trace objects differ from the scenario objects");
  const Calculus& c = *sc.calculus;
  const int n = static_cast<int>(sc.objects.size());
  const json& stages = d.at("stages");
  if (!stages.is_array()) throw TraceFormatError("stages must be an array");
  temporal::Trace tr(n, static_cast<int>(stages.size()));
  for (int t = 0; t < tr.length; ++t) {
    const json& rows = stages[t];
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw TraceFormatError("stage " + std::to_string(t) + " must have " + std::to_string(n) + " rows");
    for (int a = 0; a < n; ++a) {
      if (!rows[a].is_array() || static_cast<int>(rows[a].size()) != n)
        throw TraceFormatError("stage " + std::to_string(t) + " row " + std::to_string(a) + " must have " +
                               std::to_string(n) + " entries");
      for (int b = 0; b < n; ++b) {
        if (!rows[a][b].is_string()) throw TraceFormatError("relations must be given by name");
        const auto r = c.index_of(rows[a][b].get<std::string>());
        if (!r) throw TraceFormatError("unknown relation '" + rows[a][b].get<std::string>() + "'");
        tr.at(a, b, t) = *r;
      }
    }
  }
  return tr;
}

void print_trace(std::ostream& out, const Scenario& sc, const temporal::Trace& trace) {
  const Calculus& c = *sc.calculus;
  for (int t = 0; t < trace.length; ++t) {
    out << "t=" << t << ":";
    for (int a = 0; a < trace.objects; ++a)
      for (int b = a + 1; b < trace.objects; ++b) {
        out << " " << sc.objects[a] << "," << sc.objects[b] << "=" << c.relation_name(trace.at(a, b, t));
        if (t > 0 && trace.at(a, b, t) != trace.at(a, b, t - 1)) out << "*";
      }
    out << "\n";
  }
}

void print_result(std::ostream& out, const Scenario& sc, const simulate::SimulationResult& r, bool timings) {
  out << "scenario " << sc.name << ", t_max " << r.tmax << "\n";
  for (const auto& h : r.horizons) {
    out << "  stages " << h.stages << ": " << (h.consistent ? outcome_name(h.outcome) : "inconsistent") << ", "
        << h.nodes << " nodes, " << h.backtracks << " backtracks, " << h.variables << " variables, " << h.constraints
        << " constraints";
    if (timings) out << ", " << h.seconds << " s";
    out << "\n";
  }
  out << "status: " << simulate::status_name(r.status) << "\n";
  if (r.status == simulate::Status::Solution) {
    out << "num_transitions: " << r.num_transitions << "\n";
    print_trace(out, sc, r.trace);
  }
  if (timings) out << "seconds: " << r.seconds << "\n";
}

void print_check(std::ostream& out, const TraceReport& r) {
  if (r.ok()) {
    out << "valid\n";
    return;
  }
  out << "invalid: " << r.violations.size() << " violation(s)\n";
  for (const auto& v : r.violations) out << "  " << v.check << ": " << v.detail << "\n";
}

}  // namespace qsim::report
