#pragma once

// Scenario file -> generated world -> registrations, client endpoints, task
// submission -> training run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ifl/datagen.hpp"
#include "ifl/orchestrator.hpp"

namespace ifl {

// {"scenario": ScenarioSpec, "settings": RunSettings}
struct ScenarioFile {
  ScenarioSpec scenario;
  RunSettings settings;
};

void to_json(nlohmann::json& j, const ScenarioFile& f);
void from_json(const nlohmann::json& j, ScenarioFile& f);

nlohmann::json read_json_file(const std::filesystem::path& path);

// "path=value" with a dotted path relative to the settings section
// ("tauSplit=0.6", "costWeights.beta=2"); a leading "scenario." or
// "settings." selects the section explicitly. The value is parsed as JSON
// and taken as a string when that fails. Throws ValidationFailed.
void apply_override(nlohmann::json& file, const std::string& assignment);

struct RunOptions {
  std::optional<SyncMode> mode;
  std::optional<int> rounds;
  std::optional<bool> cohorts;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> catalogPath;
};

RunReport run_scenario(const ScenarioFile& file, const RunOptions& options = {});

}  // namespace ifl
