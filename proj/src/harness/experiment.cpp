#include "gridcomp/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "gridcomp/errors.hpp"

namespace gridcomp::harness {

namespace {

constexpr Algorithm kAlgorithms[] = {Algorithm::twet, Algorithm::mtep, Algorithm::heu, Algorithm::offline};
constexpr SweepAxis kAxes[] = {SweepAxis::battery_capacity, SweepAxis::sinr_target, SweepAxis::harvest_rate,
                               SweepAxis::V};

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::twet: return "twet";
    case Algorithm::mtep: return "mtep";
    case Algorithm::heu: return "heu";
    case Algorithm::offline: return "offline";
  }
  return "?";
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::battery_capacity: return "battery_capacity";
    case SweepAxis::sinr_target: return "sinr_target";
    case SweepAxis::harvest_rate: return "harvest_rate";
    case SweepAxis::V: return "V";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAlgorithms)
    if (to_string(a) == name) return a;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a : kAxes)
    if (to_string(a) == name) return a;
  throw InvalidArgument("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<Algorithm> parse_algorithm_list(std::string_view list) {
  std::vector<Algorithm> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t end = std::min(list.find(',', pos), list.size());
    const std::string_view item = list.substr(pos, end - pos);
    const Algorithm a = parse_algorithm(item);
    if (std::find(out.begin(), out.end(), a) != out.end())
      throw InvalidArgument("algorithm '" + std::string(item) + "' listed twice");
    out.push_back(a);
    pos = end + 1;
  }
  return out;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("experiment config: " + msg); };
  if (name.empty() || name.find_first_of("/\\") != std::string::npos)
    fail("name must be a nonempty file stem");
  if (algorithms.empty()) fail("no algorithms selected");
  for (std::size_t i = 0; i < algorithms.size(); ++i)
    for (std::size_t j = i + 1; j < algorithms.size(); ++j)
      if (algorithms[i] == algorithms[j]) fail("algorithm listed twice");
  if (grid.empty()) fail("empty axis grid");
  for (double v : grid)
    if (!std::isfinite(v)) fail("non-finite axis value");
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j)
      if (grid[i] == grid[j]) fail("duplicate axis value");
  if (num_seeds < 1) fail("seeds must be >= 1");
  if (horizon < 1) fail("horizon must be >= 1");
  const bool has_offline = std::find(algorithms.begin(), algorithms.end(), Algorithm::offline) != algorithms.end();
  if (has_offline && static_cast<long>(horizon) * network.interval_len > offline.max_slots)
    fail("offline selected but the horizon of " + std::to_string(horizon * network.interval_len) +
         " slots exceeds its guard of " + std::to_string(offline.max_slots));
  network.validate();
  scenario.validate();
  for (double v : grid) {
    const CellSetup s = apply_axis(*this, v, 0);
    s.network.validate();
    s.scenario.validate();
  }
}

std::uint64_t cell_seed(std::uint64_t master_seed, int seed_index) {
  Rng rng = make_rng(master_seed, 0x5EED0000ULL + static_cast<std::uint64_t>(seed_index));
  return rng();
}

CellSetup apply_axis(const ExperimentConfig& cfg, double axis_value, int seed_index) {
  CellSetup s{cfg.network, cfg.scenario, cfg.twet};
  s.scenario.seed = cell_seed(cfg.master_seed, seed_index);
  switch (cfg.axis) {
    case SweepAxis::battery_capacity:
      s.network.battery_max = axis_value;
      break;
    case SweepAxis::sinr_target:
      s.network.set_uniform_sinr_db(axis_value);
      // same channel draws at every grid point
      if (s.scenario.channel_screen && std::isnan(s.scenario.channel_screen_db))
        s.scenario.channel_screen_db = *std::max_element(cfg.grid.begin(), cfg.grid.end());
      break;
    case SweepAxis::harvest_rate:
      s.scenario.res_rate = axis_value;
      break;
    case SweepAxis::V:
      if (!(axis_value > 0.0)) throw InvalidArgument("V axis values are fractions of V_max in (0, 1]");
      s.twet.V = std::numeric_limits<double>::quiet_NaN();
      s.twet.v_fraction = axis_value;
      break;
  }
  return s;
}

void ResultTable::sort() {
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
    if (a.seed != b.seed) return a.seed < b.seed;
    return static_cast<int>(a.algorithm) < static_cast<int>(b.algorithm);
  });
}

std::vector<AggregateRow> aggregate(const ResultTable& table) {
  std::vector<AggregateRow> out;
  std::vector<double> values;
  std::vector<std::pair<double, Algorithm>> keys;
  for (const auto& r : table.rows) keys.emplace_back(r.axis_value, r.algorithm);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return static_cast<int>(a.second) < static_cast<int>(b.second);
  });
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& [x, algo] : keys) {
    values.clear();
    for (const auto& r : table.rows)
      if (r.axis_value == x && r.algorithm == algo && std::isfinite(r.avg_cost)) values.push_back(r.avg_cost);
    AggregateRow a;
    a.axis_value = x;
    a.algorithm = algo;
    a.count = static_cast<int>(values.size());
    if (a.count == 0) {
      a.mean = std::numeric_limits<double>::quiet_NaN();
      a.stderr_ = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (double v : values) sum += v;
      a.mean = sum / a.count;
      if (a.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stderr_ = std::sqrt(ss / (a.count - 1) / a.count);
      }
    }
    out.push_back(a);
  }
  return out;
}

RunRow run_algorithm(Algorithm algo, const Trace& trace, const ExperimentConfig& cfg, const TwetParams& twet) {
  RunRow row;
  row.algorithm = algo;
  row.trace_checksum = trace_checksum(trace);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunMetrics m;
    switch (algo) {
      case Algorithm::twet: m = twet_run(trace, twet); break;
      case Algorithm::mtep: m = mtep_run(trace, twet, cfg.planner); break;
      case Algorithm::heu: m = heuristic_run(trace, twet.solver); break;
      case Algorithm::offline: m = offline_solve(trace, cfg.offline).metrics; break;
    }
    row.avg_cost = m.avg_cost;
    row.ok = std::isfinite(m.avg_cost);
    if (!row.ok) row.message = "no cost recorded";
    row.battery_violations = m.battery_violations;
    row.sinr_violations = m.sinr_violations;
    row.cap_violations = m.cap_violations;
    row.worst_sinr_shortfall = m.worst_sinr_shortfall;
    row.worst_cap_excess = m.worst_cap_excess;
  } catch (const BatteryBoundViolation& e) {
    row.avg_cost = std::numeric_limits<double>::quiet_NaN();
    row.battery_violations = 1;
    row.message = e.what();
  } catch (const std::exception& e) {
    row.avg_cost = std::numeric_limits<double>::quiet_NaN();
    row.message = e.what();
  }
  row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

ResultTable run_experiment(const ExperimentConfig& cfg, int jobs, const ProgressFn& progress) {
  cfg.validate();
  const int cells = static_cast<int>(cfg.grid.size()) * cfg.num_seeds;
  const int workers = std::clamp(jobs, 1, std::max(cells, 1));

  ResultTable table;
  table.axis = cfg.axis;
  std::mutex mu;
  std::atomic<int> next{0};
  int done = 0;

  auto work = [&] {
    for (int cell = next++; cell < cells; cell = next++) {
      const double x = cfg.grid[cell / cfg.num_seeds];
      const int seed = cell % cfg.num_seeds;
      std::vector<RunRow> rows;
      try {
        const CellSetup setup = apply_axis(cfg, x, seed);
        const Trace trace = generate_trace(setup.network, setup.scenario, cfg.horizon);
        for (Algorithm a : cfg.algorithms) rows.push_back(run_algorithm(a, trace, cfg, setup.twet));
      } catch (const std::exception& e) {
        rows.clear();
        for (Algorithm a : cfg.algorithms) {
          RunRow r;
          r.algorithm = a;
          r.avg_cost = std::numeric_limits<double>::quiet_NaN();
          r.message = std::string("trace generation failed: ") + e.what();
          rows.push_back(r);
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      for (auto& r : rows) {
        r.axis_value = x;
        r.seed = seed;
        table.rows.push_back(std::move(r));
      }
      ++done;
      if (progress) progress(done, cells);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  table.sort();
  return table;
}

}  // namespace gridcomp::harness
