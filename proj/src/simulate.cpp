#include "qsim/simulate.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace qsim::simulate {

using csp::VarId;
using temporal::Direction;
using temporal::FormulaPtr;
using temporal::Op;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Restriction {
  int a, b;
  RelationSet allowed;
};

// A conjunct of the form Q[A,B] = r, Q[A,B] != r, or a disjunction of
// positive atoms on one pair, as a domain restriction.
std::optional<Restriction> as_restriction(const temporal::Formula& f, const Calculus& calc) {
  if (f.op == Op::Atom && f.resolved_atom()) {
    const RelationSet r = RelationSet::single(f.relation);
    return Restriction{f.obj_a, f.obj_b, f.positive ? r : calc.all() - r};
  }
  if (f.op == Op::Or) {
    Restriction out{-1, -1, RelationSet{}};
    for (const auto& k : f.kids) {
      if (k->op != Op::Atom || !k->positive || !k->resolved_atom()) return std::nullopt;
      if (out.a < 0) {
        out.a = k->obj_a;
        out.b = k->obj_b;
      } else if (out.a != k->obj_a || out.b != k->obj_b) {
        return std::nullopt;
      }
      out.allowed.insert(k->relation);
    }
    return out;
  }
  return std::nullopt;
}

// Splits state formulas into domain restrictions and the remaining formulas.
void split(const std::vector<ScenarioFormula>& fs, const Calculus& calc, std::vector<Restriction>& restrictions,
           std::vector<FormulaPtr>& rest) {
  for (const auto& sf : fs) {
    const bool state = !temporal::contains_future_ops(*sf.formula) && !temporal::contains_past_ops(*sf.formula);
    if (!state) {
      rest.push_back(sf.formula);
      continue;
    }
    std::vector<FormulaPtr> conjuncts;
    if (sf.formula->op == Op::And)
      conjuncts = sf.formula->kids;
    else
      conjuncts = {sf.formula};
    for (const auto& c : conjuncts) {
      if (auto r = as_restriction(*c, calc))
        restrictions.push_back(*r);
      else
        rest.push_back(c);
    }
  }
}

void restrict_pair(Model& m, const Restriction& r, int t) {
  m.store.restrict_mask(m.space.at(r.a, r.b, t), r.allowed.bits());
}

class Builder {
 public:
  Builder(const Scenario& sc, Model& m, translate::Translator* external = nullptr)
      : sc_(sc), m_(m), tr_(external ? *external : own_.emplace(m.store, m.space)) {
    const Calculus& c = *sc.calculus;
    const int n = c.size();
    auto conv = std::make_shared<std::vector<std::uint64_t>>(n);
    auto step = std::make_shared<std::vector<std::uint64_t>>(n);
    auto comp = std::make_shared<std::vector<std::uint64_t>>(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
      (*conv)[r] = RelationSet::single(c.converse(r)).bits();
      (*step)[r] = (c.neighbours(r) | RelationSet::single(r)).bits();
      for (int s = 0; s < n; ++s) (*comp)[static_cast<std::size_t>(r) * n + s] = c.compose(r, s).bits();
    }
    conv_ = conv;
    step_ = step;
    comp_ = comp;
    tr_.set_time_vars_decision(true);
    split(sc.initial, c, initial_r_, initial_f_);
    split(sc.intra, c, intra_r_, intra_f_);
    split(sc.final, c, final_r_, final_f_);
  }

  translate::Translator& translator() { return tr_; }

  Stage stage(int t) {
    const int n = static_cast<int>(sc_.objects.size());
    const Calculus& c = *sc_.calculus;
    Stage st{t, {}};
    st.array.resize(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const RelationSet dom = a == b ? RelationSet::single(c.identity()) : c.all();
        const VarId v = m_.store.new_var(csp::Domain::relations(dom.bits()),
                                         "Q[" + sc_.objects[a] + "," + sc_.objects[b] + "," + std::to_string(t) + "]");
        m_.space.set(a, b, t, v);
        st.array[static_cast<std::size_t>(a) * n + b] = v;
      }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        m_.store.post(csp::ExtensionalBinary{m_.space.at(a, b, t), m_.space.at(b, a, t), conv_});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d)
          if (a != b && b != d && a != d)
            m_.store.post(csp::ExtensionalTernary{m_.space.at(a, b, t), m_.space.at(b, d, t), m_.space.at(a, d, t),
                                                  comp_, c.size()});
    for (const auto& r : intra_r_) restrict_pair(m_, r, t);
    if (t == 0)
      for (const auto& r : initial_r_) restrict_pair(m_, r, t);
    for (const auto& f : intra_f_) tr_.require(f, Direction::Future, t, t, translate::Mode::Unfold);
    return st;
  }

  void link(int t) {
    const int n = static_cast<int>(sc_.objects.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) m_.store.post(csp::ExtensionalBinary{m_.space.at(a, b, t), m_.space.at(a, b, t + 1), step_});
  }

  void non_circular() {
    const int n = static_cast<int>(sc_.objects.size());
    // Pairs that are already equal and fixed in both stages cannot witness a
    // difference; pairs fixed to different values satisfy the requirement.
    m_.store.propagate();
    for (int i = 0; i < m_.stages; ++i)
      for (int j = i + 1; j < m_.stages; ++j) {
        std::vector<csp::Literal> differs;
        bool satisfied = false;
        for (int a = 0; a < n && !satisfied; ++a)
          for (int b = a + 1; b < n; ++b) {
            const VarId x = m_.space.at(a, b, i), y = m_.space.at(a, b, j);
            if (m_.store.fixed(x) && m_.store.fixed(y)) {
              if (m_.store.value(x) != m_.store.value(y)) {
                satisfied = true;
                break;
              }
              continue;
            }
            const VarId same = m_.store.new_var(csp::Domain::boolean());
            m_.store.set_decision(same, false);
            m_.store.post(csp::ReifiedIntCompare{csp::CompareOp::Eq, x, y, 0, same});
            differs.push_back({same, false});
          }
        if (!satisfied) m_.store.post(csp::BoolClause{std::move(differs), true});
      }
  }

  void change_limit(int k) {
    const int n = static_cast<int>(sc_.objects.size());
    for (int t = 0; t + 1 < m_.stages; ++t) {
      std::vector<VarId> changed;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const VarId same = m_.store.new_var(csp::Domain::boolean());
          const VarId diff = m_.store.new_var(csp::Domain::boolean());
          m_.store.set_decision(same, false);
          m_.store.set_decision(diff, false);
          m_.store.post(csp::ReifiedIntCompare{csp::CompareOp::Eq, m_.space.at(a, b, t), m_.space.at(a, b, t + 1), 0, same});
          m_.store.post(csp::BoolEquiv{csp::Gate::Not, {same}, diff});
          changed.push_back(diff);
        }
      m_.store.post(csp::AtMost{std::move(changed), k});
    }
  }

  void base() {
    const translate::Mode mode = sc_.options.translation;
    for (int t = 0; t < m_.stages; ++t) stage(t);
    for (int t = 0; t + 1 < m_.stages; ++t) link(t);
    for (const auto& f : initial_f_) tr_.require(f, Direction::Past, 0, 0, mode);
    for (int t0 = 0; t0 + 1 < m_.stages; ++t0)
      for (const auto& rule : sc_.rules) tr_.post_rule(rule, t0, mode);
    if (sc_.options.max_changes_per_step) change_limit(*sc_.options.max_changes_per_step);
    if (sc_.options.non_circular && m_.stages >= 2) non_circular();
  }

  void finals() {
    const translate::Mode mode = sc_.options.translation;
    const int last = m_.stages - 1;
    for (const auto& r : final_r_) restrict_pair(m_, r, last);
    for (const auto& f : final_f_) tr_.require(f, Direction::Past, 0, last, mode);
    for (const auto& g : sc_.goal) tr_.require(g.formula, Direction::Future, 0, last, mode);
  }

 private:
  const Scenario& sc_;
  Model& m_;
  std::optional<translate::Translator> own_;
  translate::Translator& tr_;
  csp::Table conv_, step_, comp_;
  std::vector<Restriction> initial_r_, intra_r_, final_r_;
  std::vector<FormulaPtr> initial_f_, intra_f_, final_f_;
};

Model empty_model(const Scenario& sc, int stages) {
  if (stages < 1) throw std::invalid_argument("a simulation needs at least one stage");
  Model m;
  m.stages = stages;
  m.space = translate::StageSpace(static_cast<int>(sc.objects.size()), stages);
  return m;
}

}  // namespace

Stage build_stage(const Scenario& sc, int t, Model& m, translate::Translator& tr) {
  Builder b(sc, m, &tr);
  return b.stage(t);
}

void link_stages(const Scenario& sc, int t, Model& m) {
  Builder b(sc, m);
  b.link(t);
}

void non_circularity(const Scenario& sc, Model& m) {
  Builder b(sc, m);
  b.non_circular();
}

Model build_model(const Scenario& sc, int stages, bool with_final) {
  Model m = empty_model(sc, stages);
  {
    Builder b(sc, m);
    b.base();
    if (with_final) b.finals();
  }
  return m;
}

std::int64_t default_tmax(const Scenario& sc, std::int64_t cap) {
  if (sc.options.max_steps) return *sc.options.max_steps;
  const std::int64_t n = static_cast<std::int64_t>(sc.objects.size());
  const int q = sc.calculus->size();
  std::int64_t v = n * (n - 1);
  if (v == 0) return 1;
  for (int i = 0; i < q - 1; ++i) {
    if (v > std::numeric_limits<std::int64_t>::max() / 2) throw std::overflow_error("t_max overflows; set max_steps");
    v *= 2;
  }
  if (v > cap)
    throw std::overflow_error("t_max = " + std::to_string(v) + " exceeds the cap of " + std::to_string(cap) +
                              "; set max_steps");
  return v;
}

csp::Branching branching_for(const Scenario& sc) {
  csp::Branching br;
  if (sc.options.heuristic == Heuristic::Tractable)
    for (const RelationSet& s : sc.calculus->tractable_subclass()) br.tractable_subclass.push_back(s.bits());
  return br;
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Solution: return "solution";
    case Status::NoSolutionWithinTmax: return "no_solution_within_tmax";
    case Status::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

temporal::Trace extract_trace(const Model& m, const csp::Solution& sol) {
  const int n = m.space.objects();
  temporal::Trace tr(n, m.stages);
  for (int t = 0; t < m.stages; ++t)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) tr.at(a, b, t) = sol[m.space.at(a, b, t)];
  return tr;
}

HorizonStats solve_horizon(const Scenario& sc, int stages, const csp::SearchLimits& limits,
                           std::optional<temporal::Trace>& trace) {
  const auto start = Clock::now();
  HorizonStats hs;
  hs.stages = stages;
  Model m = empty_model(sc, stages);
  Builder b(sc, m);
  b.base();
  hs.consistent = m.store.propagate() == csp::Outcome::Consistent;
  if (hs.consistent) {
    b.finals();
    const csp::SolveResult r = csp::solve(m.store, branching_for(sc), limits);
    hs.outcome = r.status;
    hs.nodes = r.stats.nodes;
    hs.backtracks = r.stats.backtracks;
    if (r.status == csp::SearchStatus::Solution) trace = extract_trace(m, r.solution);
  }
  hs.variables = m.store.num_vars();
  hs.constraints = m.store.num_constraints();
  hs.seconds = seconds_since(start);
  return hs;
}

namespace {

csp::SearchLimits limits_for(const Scenario& sc, Clock::time_point start) {
  csp::SearchLimits lim;
  lim.node_budget = sc.options.node_budget;
  if (sc.options.time_budget)
    lim.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*sc.options.time_budget));
  return lim;
}

// Initial and intra constraints alone already fail: no horizon can succeed.
bool base_inconsistent(const Scenario& sc) {
  Model m = empty_model(sc, 1);
  Builder b(sc, m);
  b.base();
  return m.store.propagate() == csp::Outcome::Inconsistent;
}

bool past_deadline(const csp::SearchLimits& lim) { return lim.deadline && Clock::now() >= *lim.deadline; }

}  // namespace

SimulationResult simulate(const Scenario& sc) {
  const auto start = Clock::now();
  SimulationResult res;
  res.tmax = default_tmax(sc);
  const csp::SearchLimits lim = limits_for(sc, start);
  if (base_inconsistent(sc)) {
    res.seconds = seconds_since(start);
    return res;
  }
  for (std::int64_t u = 1; u <= res.tmax; ++u) {
    if (past_deadline(lim)) {
      res.status = Status::BudgetExhausted;
      break;
    }
    std::optional<temporal::Trace> trace;
    res.horizons.push_back(solve_horizon(sc, static_cast<int>(u), lim, trace));
    const HorizonStats& hs = res.horizons.back();
    if (hs.outcome == csp::SearchStatus::Solution) {
      res.status = Status::Solution;
      res.trace = std::move(*trace);
      res.num_transitions = static_cast<int>(u) - 1;
      break;
    }
    if (hs.outcome == csp::SearchStatus::Exhausted) {
      res.status = Status::BudgetExhausted;
      break;
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

SimulationResult simulate_parallel(const Scenario& sc, int threads) {
  const auto start = Clock::now();
  if (threads <= 0) threads = omp_get_max_threads();
  SimulationResult res;
  res.tmax = default_tmax(sc);
  const csp::SearchLimits lim = limits_for(sc, start);
  if (base_inconsistent(sc)) {
    res.seconds = seconds_since(start);
    return res;
  }
  for (std::int64_t first = 1; first <= res.tmax; first += threads) {
    if (past_deadline(lim)) {
      res.status = Status::BudgetExhausted;
      break;
    }
    const int batch = static_cast<int>(std::min<std::int64_t>(threads, res.tmax - first + 1));
    std::vector<HorizonStats> stats(batch);
    std::vector<std::optional<temporal::Trace>> traces(batch);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int i = 0; i < batch; ++i) stats[i] = solve_horizon(sc, static_cast<int>(first) + i, lim, traces[i]);

    // Horizons are reported in order up to the first decisive one, exactly as
    // the sequential loop would have seen them.
    bool done = false;
    for (int i = 0; i < batch && !done; ++i) {
      res.horizons.push_back(stats[i]);
      if (stats[i].outcome == csp::SearchStatus::Solution) {
        res.status = Status::Solution;
        res.trace = std::move(*traces[i]);
        res.num_transitions = static_cast<int>(first) + i - 1;
        done = true;
      } else if (stats[i].outcome == csp::SearchStatus::Exhausted) {
        res.status = Status::BudgetExhausted;
        done = true;
      }
    }
    if (done) break;
  }
  res.seconds = seconds_since(start);
  return res;
}

EnumerateResult enumerate(const Scenario& sc, int stages, std::size_t limit) {
  const auto start = Clock::now();
  EnumerateResult out;
  out.stats.stages = stages;
  Model m = empty_model(sc, stages);
  Builder b(sc, m);
  b.base();
  out.stats.consistent = m.store.propagate() == csp::Outcome::Consistent;
  if (out.stats.consistent) {
    b.finals();
    std::vector<VarId> q;
    const int n = m.space.objects();
    for (int t = 0; t < stages; ++t)
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) q.push_back(m.space.at(a, c, t));
    const auto r = csp::solve_all(m.store, branching_for(sc), limit, q, limits_for(sc, start));
    for (const auto& s : r.solutions) out.traces.push_back(extract_trace(m, s));
    out.limit_reached = r.limit_reached;
    out.exhausted = r.status == csp::SearchStatus::Exhausted;
    out.stats.outcome = r.status;
    out.stats.nodes = r.stats.nodes;
    out.stats.backtracks = r.stats.backtracks;
  }
  out.stats.variables = m.store.num_vars();
  out.stats.constraints = m.store.num_constraints();
  out.stats.seconds = seconds_since(start);
  return out;
}

}  // namespace qsim::simulate
