#include "gridcomp/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "gridcomp/errors.hpp"
#include "gridcomp/json_io.hpp"

namespace gridcomp::harness {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json nan_to_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// Null maps to NaN.
void read_optional_double(const json& j, const char* key, double& out, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (it->is_null()) {
    out = kNaN;
    return;
  }
  read_field(j, key, out, what);
}

std::string_view to_string(OfflineMode m) {
  return m == OfflineMode::single_timescale ? "single_timescale" : "two_timescale";
}

json twet_json(const TwetParams& p) {
  json j{{"V", nan_to_null(p.V)},
         {"v_fraction", p.v_fraction},
         {"strict_v", p.strict_v},
         {"initial_battery", nan_to_null(p.initial_battery)}};
  j["gamma"] = p.gamma ? json(*p.gamma) : json(nullptr);
  return j;
}

TwetParams twet_from_json(const json& j) {
  const char* what = "twet";
  reject_unknown_keys(j, {"V", "v_fraction", "gamma", "strict_v", "initial_battery"}, what);
  TwetParams p;
  read_optional_double(j, "V", p.V, what);
  read_field(j, "v_fraction", p.v_fraction, what);
  read_field(j, "strict_v", p.strict_v, what);
  read_optional_double(j, "initial_battery", p.initial_battery, what);
  if (auto it = j.find("gamma"); it != j.end() && !it->is_null()) {
    double g = 0.0;
    read_field(j, "gamma", g, what);
    p.gamma = g;
  }
  return p;
}

json planner_json(const PlannerParams& p) {
  return json{{"max_iters", p.max_iters},
              {"step0", nan_to_null(p.step0)},
              {"history_min", p.history_min},
              {"history_capacity", p.history_capacity},
              {"seed", p.seed}};
}

PlannerParams planner_from_json(const json& j) {
  const char* what = "planner";
  reject_unknown_keys(j, {"max_iters", "step0", "history_min", "history_capacity", "seed"}, what);
  PlannerParams p;
  read_field(j, "max_iters", p.max_iters, what);
  read_optional_double(j, "step0", p.step0, what);
  read_field(j, "history_min", p.history_min, what);
  read_field(j, "history_capacity", p.history_capacity, what);
  read_field(j, "seed", p.seed, what);
  return p;
}

json offline_json(const OfflineParams& p) {
  return json{{"mode", std::string(to_string(p.mode))},
              {"max_slots", p.max_slots},
              {"initial_battery", nan_to_null(p.initial_battery)},
              {"energy_neutral", p.energy_neutral}};
}

OfflineParams offline_from_json(const json& j) {
  const char* what = "offline";
  reject_unknown_keys(j, {"mode", "max_slots", "initial_battery", "energy_neutral"}, what);
  OfflineParams p;
  std::string mode(to_string(p.mode));
  read_field(j, "mode", mode, what);
  if (mode == "single_timescale")
    p.mode = OfflineMode::single_timescale;
  else if (mode == "two_timescale")
    p.mode = OfflineMode::two_timescale;
  else
    throw FormatError("offline.mode: unknown mode '" + mode + "'");
  read_field(j, "max_slots", p.max_slots, what);
  read_optional_double(j, "initial_battery", p.initial_battery, what);
  read_field(j, "energy_neutral", p.energy_neutral, what);
  return p;
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
  json algos = json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(std::string(to_string(a)));
  return json{{"name", cfg.name},
              {"axis", std::string(to_string(cfg.axis))},
              {"grid", cfg.grid},
              {"seeds", cfg.num_seeds},
              {"horizon", cfg.horizon},
              {"master_seed", cfg.master_seed},
              {"algorithms", algos},
              {"network", gridcomp::to_json(cfg.network)},
              {"scenario", gridcomp::to_json(cfg.scenario)},
              {"twet", twet_json(cfg.twet)},
              {"planner", planner_json(cfg.planner)},
              {"offline", offline_json(cfg.offline)}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  const char* what = "experiment";
  reject_unknown_keys(j,
                      {"name", "axis", "grid", "seeds", "horizon", "master_seed", "algorithms", "network",
                       "scenario", "twet", "planner", "offline"},
                      what);
  ExperimentConfig cfg;
  read_field(j, "name", cfg.name, what);
  if (j.contains("axis")) {
    std::string axis;
    read_field(j, "axis", axis, what);
    try {
      cfg.axis = parse_axis(axis);
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("experiment.axis: ") + e.what());
    }
  }
  read_field(j, "grid", cfg.grid, what);
  read_field(j, "seeds", cfg.num_seeds, what);
  read_field(j, "horizon", cfg.horizon, what);
  read_field(j, "master_seed", cfg.master_seed, what);
  if (j.contains("algorithms")) {
    std::vector<std::string> names;
    read_field(j, "algorithms", names, what);
    cfg.algorithms.clear();
    try {
      for (const auto& n : names) cfg.algorithms.push_back(parse_algorithm(n));
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("experiment.algorithms: ") + e.what());
    }
  }
  if (j.contains("network")) cfg.network = network_config_from_json(j.at("network"));
  if (j.contains("scenario")) cfg.scenario = scenario_params_from_json(j.at("scenario"));
  if (j.contains("twet")) cfg.twet = twet_from_json(j.at("twet"));
  if (j.contains("planner")) cfg.planner = planner_from_json(j.at("planner"));
  if (j.contains("offline")) cfg.offline = offline_from_json(j.at("offline"));
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
  try {
    return experiment_config_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config '" + path + "'");
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace gridcomp::harness
