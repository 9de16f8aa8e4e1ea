#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rfv/sim/experiments.hpp"

namespace rfv::service {

// Everything a CLI run needs: module settings, the sim suite, seeds and paths.
struct RunConfig {
  sim::ExperimentConfig experiment = sim::default_experiment();
  std::string bank_path;
  std::string out_dir;
};

// JSON Schema (draft 2020-12 subset) describing the RunConfig document.
// Every object closes its property list, so unknown keys are rejected.
const nlohmann::json& run_config_schema();

// Checks `doc` against `schema`. Supported keywords: type, properties,
// additionalProperties (false), required, items, enum, minimum, maximum,
// exclusiveMinimum, minItems. Throws kConfigError naming the JSON pointer
// of the first violation.
void validate_schema(const nlohmann::json& doc, const nlohmann::json& schema);

nlohmann::json to_json(const RunConfig& config);
// Validates against run_config_schema(); missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& doc);
// Reads and parses a config file. Throws kIoError or kConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

// The explicit path if given, else $RFV_CONFIG if set and non-empty.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path);

}  // namespace rfv::service
