#pragma once

// JSON mapping of configuration records. Missing keys keep their defaults;
// unknown keys are rejected with FormatError.

#include <json.hpp>
#include <string>

#include "gridcomp/errors.hpp"

#include "gridcomp/model.hpp"
#include "gridcomp/scenario.hpp"

namespace gridcomp {

nlohmann::json to_json(const NetworkConfig& cfg);
NetworkConfig network_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioParams& p);
ScenarioParams scenario_params_from_json(const nlohmann::json& j);

// Throws FormatError naming the first key of j not in allowed.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* what);

// Reads j[key] into out when present; type errors become FormatError.
template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + "." + key + ": " + e.what());
  }
}

}  // namespace gridcomp
