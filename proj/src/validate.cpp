#include "qsim/validate.hpp"

#include <set>

namespace qsim {

using temporal::Direction;

namespace {

class Checker {
 public:
  Checker(const Scenario& sc, const temporal::Trace& tr) : sc_(sc), c_(*sc.calculus), tr_(tr) {}

  TraceReport run() {
    if (!shape()) return std::move(report_);
    stages();
    transitions();
    formulas();
    if (sc_.options.non_circular) non_circular();
    if (sc_.options.max_changes_per_step) changes(*sc_.options.max_changes_per_step);
    return std::move(report_);
  }

 private:
  void add(std::string check, std::string detail) { report_.violations.push_back({std::move(check), std::move(detail)}); }

  std::string pair(int a, int b, int t) const {
    return "Q[" + sc_.objects[a] + "," + sc_.objects[b] + "," + std::to_string(t) + "]";
  }
  std::string rel(int a, int b, int t) const { return c_.relation_name(tr_.at(a, b, t)); }

  bool shape() {
    const int n = static_cast<int>(sc_.objects.size());
    if (tr_.objects != n) {
      add("shape", "trace has " + std::to_string(tr_.objects) + " objects, scenario " + std::to_string(n));
      return false;
    }
    if (tr_.length < 1) {
      add("shape", "trace has no stages");
      return false;
    }
    if (tr_.relations.size() != static_cast<std::size_t>(n) * n * tr_.length) {
      add("shape", "relation array has the wrong size");
      return false;
    }
    for (int v : tr_.relations)
      if (v < 0 || v >= c_.size()) {
        add("shape", "relation index " + std::to_string(v) + " out of range");
        return false;
      }
    return true;
  }

  void stages() {
    const int n = tr_.objects;
    for (int t = 0; t < tr_.length; ++t)
      for (int a = 0; a < n; ++a) {
        if (tr_.at(a, a, t) != c_.identity()) add("reflexivity", pair(a, a, t) + " = " + rel(a, a, t));
        for (int b = 0; b < n; ++b) {
          if (a != b && tr_.at(b, a, t) != c_.converse(tr_.at(a, b, t)))
            add("converse", pair(a, b, t) + " = " + rel(a, b, t) + " but " + pair(b, a, t) + " = " + rel(b, a, t));
          for (int d = 0; d < n; ++d)
            if (!c_.compose(tr_.at(a, b, t), tr_.at(b, d, t)).contains(tr_.at(a, d, t)))
              add("composition", pair(a, b, t) + " = " + rel(a, b, t) + ", " + pair(b, d, t) + " = " + rel(b, d, t) +
                                     ", " + pair(a, d, t) + " = " + rel(a, d, t));
        }
      }
  }

  void transitions() {
    const int n = tr_.objects;
    for (int t = 0; t + 1 < tr_.length; ++t)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const int x = tr_.at(a, b, t), y = tr_.at(a, b, t + 1);
          if (x != y && !c_.adjacent(x, y))
            add("transition", pair(a, b, t) + " = " + rel(a, b, t) + " -> " + rel(a, b, t + 1));
        }
  }

  void formulas() {
    const int last = tr_.length - 1;
    for (const auto& f : sc_.initial)
      if (!temporal::eval(*f.formula, tr_, 0, 0, Direction::Past)) add("initial", f.text);
    for (const auto& f : sc_.intra)
      for (int t = 0; t <= last; ++t)
        if (!temporal::eval(*f.formula, tr_, t, t, Direction::Future)) add("intra", f.text + " at stage " + std::to_string(t));
    for (const auto& r : sc_.rules)
      for (int t0 = 0; t0 < last; ++t0)
        if (temporal::eval(*r.past, tr_, 0, t0, Direction::Past) &&
            !temporal::eval(*r.future, tr_, t0 + 1, last, Direction::Future))
          add("rule", r.label + " at t0 = " + std::to_string(t0));
    for (const auto& f : sc_.goal)
      if (!temporal::eval(*f.formula, tr_, 0, last, Direction::Future)) add("goal", f.text);
    for (const auto& f : sc_.final)
      if (!temporal::eval(*f.formula, tr_, 0, last, Direction::Past)) add("final", f.text);
  }

  void non_circular() {
    const std::size_t per = static_cast<std::size_t>(tr_.objects) * tr_.objects;
    std::set<std::vector<int>> seen;
    for (int t = 0; t < tr_.length; ++t) {
      std::vector<int> stage(tr_.relations.begin() + t * per, tr_.relations.begin() + (t + 1) * per);
      if (!seen.insert(std::move(stage)).second) add("non-circularity", "stage " + std::to_string(t) + " repeats an earlier stage");
    }
  }

  void changes(int k) {
    const int n = tr_.objects;
    for (int t = 0; t + 1 < tr_.length; ++t) {
      int changed = 0;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) changed += tr_.at(a, b, t) != tr_.at(a, b, t + 1);
      if (changed > k)
        add("max-changes", std::to_string(changed) + " pairs change between stages " + std::to_string(t) + " and " +
                               std::to_string(t + 1));
    }
  }

  const Scenario& sc_;
  const Calculus& c_;
  const temporal::Trace& tr_;
  TraceReport report_;
};

}  // namespace

TraceReport check_trace(const Scenario& sc, const temporal::Trace& trace) { return Checker(sc, trace).run(); }

}  // namespace qsim
