#pragma once

// Sweeps over one configuration axis: every (axis value, seed) cell draws one
// trace and runs each selected algorithm on it.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridcomp/baselines.hpp"
#include "gridcomp/mtep.hpp"
#include "gridcomp/scenario.hpp"
#include "gridcomp/twet.hpp"

namespace gridcomp::harness {

enum class Algorithm { twet, mtep, heu, offline };
enum class SweepAxis { battery_capacity, sinr_target, harvest_rate, V };

std::string_view to_string(Algorithm a);
std::string_view to_string(SweepAxis a);
// Throw InvalidArgument on unknown names.
Algorithm parse_algorithm(std::string_view name);
SweepAxis parse_axis(std::string_view name);
// Comma-separated list, e.g. "twet,heu".
std::vector<Algorithm> parse_algorithm_list(std::string_view list);

struct ExperimentConfig {
  std::string name = "experiment";
  NetworkConfig network = NetworkConfig::reference();
  ScenarioParams scenario;
  std::vector<Algorithm> algorithms{Algorithm::twet, Algorithm::mtep, Algorithm::heu, Algorithm::offline};
  SweepAxis axis = SweepAxis::battery_capacity;
  // battery_capacity: C_max (kWh); sinr_target: dB for every user;
  // harvest_rate: mean kWh per slot; V: fraction of V_max.
  std::vector<double> grid{40.0, 60.0, 80.0, 100.0, 120.0};
  int num_seeds = 10;
  int horizon = 200;  // intervals N
  std::uint64_t master_seed = 1;
  TwetParams twet;
  PlannerParams planner;
  OfflineParams offline;

  // Throws InvalidArgument.
  void validate() const;
};

// Scenario seed of seed index s. Shared by every axis value so that cells
// along the axis see common random numbers.
std::uint64_t cell_seed(std::uint64_t master_seed, int seed_index);

struct CellSetup {
  NetworkConfig network;
  ScenarioParams scenario;
  TwetParams twet;
};

// Configuration of one cell.
CellSetup apply_axis(const ExperimentConfig& cfg, double axis_value, int seed_index);

struct RunRow {
  double axis_value = 0.0;
  int seed = 0;
  Algorithm algorithm = Algorithm::heu;
  double avg_cost = 0.0;  // NaN for failed runs
  double runtime_s = 0.0;
  bool ok = false;
  std::string message;  // failure reason
  std::uint64_t trace_checksum = 0;
  int battery_violations = 0;
  int sinr_violations = 0;
  int cap_violations = 0;
  double worst_sinr_shortfall = 0.0;
  double worst_cap_excess = 0.0;
};

struct ResultTable {
  SweepAxis axis = SweepAxis::battery_capacity;
  // Sorted by (axis_value, seed, algorithm).
  std::vector<RunRow> rows;

  void sort();
};

struct AggregateRow {
  double axis_value = 0.0;
  Algorithm algorithm = Algorithm::heu;
  int count = 0;  // finite runs
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(count); 0 for a single run
};

// Mean and standard error over seeds per (axis value, algorithm), failed runs skipped.
std::vector<AggregateRow> aggregate(const ResultTable& table);

// Called after every finished cell with (done, total).
using ProgressFn = std::function<void(int, int)>;

// Runs all cells on up to `jobs` worker threads. Per-run failures are recorded
// in the rows; the sweep itself only throws on an invalid configuration.
ResultTable run_experiment(const ExperimentConfig& cfg, int jobs = 1, const ProgressFn& progress = {});

// One algorithm on one trace.
RunRow run_algorithm(Algorithm algo, const Trace& trace, const ExperimentConfig& cfg, const TwetParams& twet);

}  // namespace gridcomp::harness
