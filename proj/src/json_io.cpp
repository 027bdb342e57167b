#include "gridcomp/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gridcomp/errors.hpp"

namespace gridcomp {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw FormatError(std::string(what) + ": unknown key '" + key + "'");
  }
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out, const char* what) {
  read_field(j, key, out, what);
}

}  // namespace

json to_json(const NetworkConfig& c) {
  return json{{"num_bs", c.num_bs},
              {"num_antennas", c.num_antennas},
              {"num_users", c.num_users},
              {"sinr_targets", c.sinr_targets},
              {"noise_vars", c.noise_vars},
              {"circuit_power", c.circuit_power},
              {"max_consumption", c.max_consumption},
              {"battery_min", c.battery_min},
              {"battery_max", c.battery_max},
              {"charge_min", c.charge_min},
              {"charge_max", c.charge_max},
              {"interval_len", c.interval_len}};
}

NetworkConfig network_config_from_json(const json& j) {
  const char* what = "config";
  reject_unknown_keys(j,
                      {"num_bs", "num_antennas", "num_users", "sinr_targets", "sinr_db", "noise_vars",
                       "circuit_power", "max_consumption", "battery_min", "battery_max", "charge_min",
                       "charge_max", "interval_len"},
                      what);
  NetworkConfig c;
  c.sinr_targets.clear();
  c.noise_vars.clear();
  read(j, "num_bs", c.num_bs, what);
  read(j, "num_antennas", c.num_antennas, what);
  read(j, "num_users", c.num_users, what);
  read(j, "circuit_power", c.circuit_power, what);
  read(j, "max_consumption", c.max_consumption, what);
  read(j, "battery_min", c.battery_min, what);
  read(j, "battery_max", c.battery_max, what);
  read(j, "charge_min", c.charge_min, what);
  read(j, "charge_max", c.charge_max, what);
  read(j, "interval_len", c.interval_len, what);
  if (j.contains("sinr_targets") && j.contains("sinr_db"))
    throw FormatError("config: give sinr_targets or sinr_db, not both");
  read(j, "sinr_targets", c.sinr_targets, what);
  read(j, "noise_vars", c.noise_vars, what);
  if (j.contains("sinr_db")) {
    double db = 0.0;
    read(j, "sinr_db", db, what);
    c.sinr_targets.assign(static_cast<std::size_t>(std::max(c.num_users, 0)), db_to_linear(db));
  } else if (c.sinr_targets.empty()) {
    c.sinr_targets.assign(static_cast<std::size_t>(std::max(c.num_users, 0)), db_to_linear(5.0));
  }
  if (c.noise_vars.empty()) c.noise_vars.assign(static_cast<std::size_t>(std::max(c.num_users, 0)), 1.0);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return c;
}

json to_json(const ScenarioParams& p) {
  json j{{"mean_buy_rt", p.mean_buy_rt},     {"mean_buy_lt", p.mean_buy_lt},
         {"sell_ratio_rt", p.sell_ratio_rt}, {"sell_ratio_lt", p.sell_ratio_lt},
         {"price_rel_std", p.price_rel_std}, {"res_rate", p.res_rate},
         {"res_rel_std", p.res_rel_std},     {"price_cap", p.price_cap},
         {"channel_screen", p.channel_screen}, {"seed", p.seed}};
  j["channel_screen_db"] = std::isnan(p.channel_screen_db) ? json(nullptr) : json(p.channel_screen_db);
  return j;
}

ScenarioParams scenario_params_from_json(const json& j) {
  const char* what = "params";
  reject_unknown_keys(j,
                      {"mean_buy_rt", "mean_buy_lt", "sell_ratio_rt", "sell_ratio_lt", "price_rel_std",
                       "res_rate", "res_rel_std", "price_cap", "channel_screen", "channel_screen_db", "seed"},
                      what);
  ScenarioParams p;
  read(j, "mean_buy_rt", p.mean_buy_rt, what);
  read(j, "mean_buy_lt", p.mean_buy_lt, what);
  read(j, "sell_ratio_rt", p.sell_ratio_rt, what);
  read(j, "sell_ratio_lt", p.sell_ratio_lt, what);
  read(j, "price_rel_std", p.price_rel_std, what);
  read(j, "res_rate", p.res_rate, what);
  read(j, "res_rel_std", p.res_rel_std, what);
  read(j, "price_cap", p.price_cap, what);
  read(j, "channel_screen", p.channel_screen, what);
  read(j, "seed", p.seed, what);
  if (auto it = j.find("channel_screen_db"); it != j.end() && !it->is_null())
    read(j, "channel_screen_db", p.channel_screen_db, what);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return p;
}

}  // namespace gridcomp
