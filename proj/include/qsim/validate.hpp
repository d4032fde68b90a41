// Independent trace checker: evaluates every scenario constraint on a concrete
// trace with the reference evaluator and the calculus tables. It shares no
// code with the constraint translation.
#pragma once

#include <string>
#include <vector>

#include "qsim/scenario.hpp"
#include "qsim/temporal.hpp"

namespace qsim {

struct TraceViolation {
  std::string check;   // "composition", "transition", "rule", ...
  std::string detail;
};

struct TraceReport {
  std::vector<TraceViolation> violations;
  bool ok() const { return violations.empty(); }
};

TraceReport check_trace(const Scenario& sc, const temporal::Trace& trace);

}  // namespace qsim
