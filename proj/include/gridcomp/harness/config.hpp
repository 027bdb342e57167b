#pragma once

// Experiment configuration files: one JSON object with the sections
// "network", "scenario", "twet", "planner" and "offline" next to the sweep
// fields. Missing keys keep their defaults; unknown keys are rejected.

#include <json.hpp>
#include <string>

#include "gridcomp/harness/experiment.hpp"

namespace gridcomp::harness {

nlohmann::json to_json(const ExperimentConfig& cfg);
// Throws FormatError on malformed or unknown fields and InvalidArgument when
// the result fails validation.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace gridcomp::harness
