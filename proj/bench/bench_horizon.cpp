// Serial versus parallel horizon sweep on the bundled scenarios.
#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

#include "qsim/simulate.hpp"

using namespace qsim;

namespace {

template <class Fn>
double median_seconds(int repeats, Fn&& fn) {
  std::vector<double> t;
  for (int i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Horizon sweep benchmark"};
  int repeats = 5;
  int threads = omp_get_max_threads();
  std::vector<std::string> names = builtin_scenario_names();
  app.add_option("--repeats", repeats, "runs per measurement (median reported)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "threads for the parallel sweep")->check(CLI::PositiveNumber);
  app.add_option("scenarios", names, "builtin scenario names");
  CLI11_PARSE(app, argc, argv);

  std::printf("%-14s %6s %11s %11s %8s %s\n", "scenario", "trans", "serial_s", "parallel_s", "speedup", "same");
  for (const auto& name : names) {
    const auto sc = builtin_scenario(name);
    if (!sc) {
      std::fprintf(stderr, "unknown scenario '%s'\n", name.c_str());
      return 2;
    }
    simulate::SimulationResult serial, parallel;
    const double ts = median_seconds(repeats, [&] { serial = simulate::simulate(*sc); });
    const double tp = median_seconds(repeats, [&] { parallel = simulate::simulate_parallel(*sc, threads); });
    const bool same = serial.status == parallel.status && serial.num_transitions == parallel.num_transitions &&
                      serial.trace.relations == parallel.trace.relations;
    std::printf("%-14s %6d %11.4f %11.4f %8.2f %s\n", name.c_str(), serial.num_transitions, ts, tp, ts / tp,
                same ? "yes" : "NO");
  }
  std::printf("threads: %d\n", threads);
  return 0;
}
