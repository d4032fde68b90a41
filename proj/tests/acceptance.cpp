// Prints one PASS/FAIL line per acceptance criterion and exits nonzero when
// any of them fails.
#include <chrono>
#include <cstdio>
#include <string>

#include "calculus_oracle.hpp"
#include "csp_oracle.hpp"
#include "oracle_suite.hpp"
#include "qsim/simulate.hpp"
#include "qsim/translate.hpp"
#include "qsim/validate.hpp"

using namespace qsim;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  failures += !ok;
  std::printf("%s %d %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", seconds);
  return buf;
}

struct CaseStudy {
  bool ok = false;
  std::string detail;
};

// Solves a bundled scenario and checks length, validity, the time limit and
// that no simulation exists one stage earlier.
CaseStudy case_study(const char* name, int expected, double limit) {
  const Scenario sc = *builtin_scenario(name);
  const auto start = Clock::now();
  const auto r = simulate::simulate(sc);
  const double secs = since(start);
  CaseStudy out;
  if (r.status != simulate::Status::Solution) {
    out.detail = std::string(name) + ": " + simulate::status_name(r.status) + " after " + fmt(secs);
    return out;
  }
  const bool valid = check_trace(sc, r.trace).ok();
  const int stages = r.num_transitions + 1;
  const bool minimal = stages == 1 || simulate::enumerate(sc, stages - 1, 1).traces.empty();
  out.ok = r.num_transitions == expected && valid && minimal && secs < limit;
  out.detail = std::string(name) + ": " + std::to_string(r.num_transitions) + " transitions (expected " +
               std::to_string(expected) + "), " + (valid ? "valid" : "INVALID") + ", " +
               (minimal ? "none shorter" : "a shorter one exists") + ", " + fmt(secs) + " (limit " + fmt(limit) + ")";
  return out;
}

void navigation() {
  const auto c = case_study("navigation", 13, 60);
  report(1, c.ok, c.detail);
}

void piano() {
  auto c = case_study("piano", 12, 120);
  // Minimality at the expected length: nothing with 11 transitions.
  const Scenario sc = *builtin_scenario("piano");
  const auto e = simulate::enumerate(sc, 12, 1);
  const bool empty = e.traces.empty() && !e.exhausted;
  c.detail += std::string("; enumerate with 11 transitions: ") + (empty ? "empty" : "non-empty");
  report(2, c.ok && empty, c.detail);
}

void phagocytosis() {
  const auto c = case_study("phagocytosis", 9, 120);
  report(3, c.ok, c.detail);
}

struct Stages {
  csp::Store store;
  translate::StageSpace space;
  temporal::Vocabulary vocab;

  Stages(int horizon) : space(4, horizon), vocab{{"ship", "buoy_a", "buoy_b", "buoy_c"}, &builtin_cardinal(), {}} {
    for (int t = 0; t < horizon; ++t)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          space.set(a, b, t, store.new_var(csp::Domain::relations(builtin_cardinal().all().bits())));
  }
};

void translation_size() {
  const char* text = "F (Q[ship,buoy_a] = W & F Q[ship,buoy_b] = N)";
  bool ok = true;
  std::string unfolded;
  for (int n = 1; n <= 10; ++n) {
    Stages s(n + 1);
    translate::Translator tr(s.store, s.space);
    tr.set_memo(false);
    tr.unfold(temporal::desugar(temporal::parse_formula(text), s.vocab), temporal::Direction::Future, 1, n);
    const auto got = s.store.count(csp::ConstraintKind::ReifiedValueEq);
    ok &= got == std::size_t(n * (n + 3) / 2);
    unfolded += (n > 1 ? "," : "") + std::to_string(got);
  }
  Stages s(11);
  translate::Translator tr(s.store, s.space);
  tr.array(temporal::nnf(temporal::desugar(temporal::parse_formula(text), s.vocab)), temporal::Direction::Future, 1,
           10);
  std::size_t order = 0;
  for (std::size_t i = 0; i < s.store.num_constraints(); ++i)
    if (auto* k = std::get_if<csp::ReifiedIntCompare>(&s.store.constraint(i)))
      order += k->op == csp::CompareOp::Le && !k->b;
  const auto arrays = s.store.count(csp::ConstraintKind::ArrayElement);
  ok &= arrays == 2 && order == 4;
  report(4, ok,
         "unfold n=1..10: " + unfolded + " reified equalities (n(n+3)/2); array: " + std::to_string(arrays) +
             " element, " + std::to_string(order) + " ordering constraints");
}

void oracle() {
  const auto start = Clock::now();
  const auto r = testing::oracle_equivalence(3, 4);
  const double secs = since(start);
  report(5, r.discrepancies == 0 && secs < 300,
         std::to_string(r.formulas) + " formulas, " + std::to_string(r.checks) + " checks, " +
             std::to_string(r.discrepancies) + " discrepancies, " + fmt(secs) + " (limit 300.00 s)" +
             (r.first.empty() ? "" : "; first: " + r.first));
}

void calculi() {
  const auto rv = validate(builtin_rcc8()), cv = validate(builtin_cardinal());
  const Calculus& c = builtin_cardinal();
  const auto grid = testing::cardinal_grid_table(c);
  int cells = 0;
  for (int r = 0; r < c.size(); ++r)
    for (int s = 0; s < c.size(); ++s) cells += c.compose(r, s) == grid[r * c.size() + s];
  report(6, rv.empty() && cv.empty() && cells == c.size() * c.size(),
         "rcc8 " + std::to_string(rv.size()) + " axiom violations, cardinal " + std::to_string(cv.size()) +
             ", cardinal table matches the grid in " + std::to_string(cells) + "/" + std::to_string(c.size() * c.size()) +
             " cells");
}

void gac() {
  const auto g = testing::gac_suite(20240611, 200);
  const long order = testing::order_suite(77, 5, 200, 10);
  report(7, g.lost == 0 && g.unsupported == 0 && g.wrong_failure == 0 && order == 0,
         "200 stores (" + std::to_string(g.consistent) + " consistent): " + std::to_string(g.lost) +
             " supported values removed, " + std::to_string(g.unsupported) + " unsupported values kept, " +
             std::to_string(order) + " order-dependent fixpoints over 10 permutations");
}

void triangle() {
  const auto t = testing::triangle_suite(builtin_rcc8(), {});
  report(8, t.equal && t.duplicates == 0 && t.complete,
         "rcc8 triangle: " + std::to_string(t.found) + " solutions, brute force " + std::to_string(t.brute) + ", " +
             std::to_string(t.duplicates) + " duplicates");
}

}  // namespace

int main() {
  navigation();
  piano();
  phagocytosis();
  translation_size();
  oracle();
  calculi();
  gac();
  triangle();
  return failures == 0 ? 0 : 1;
}
