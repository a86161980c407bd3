#pragma once

// Deterministic synthetic worlds: one organization, edge device, asset and
// training task per client, with linear-Gaussian data drawn from the client's
// operating-condition profile.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"
#include "ifl/registry.hpp"
#include "ifl/simnet.hpp"

namespace ifl {

struct ConditionProfile {
  std::string name;
  std::vector<double> trueWeights;
  double trueBias = 0.0;
  double noiseSigma = 0.0;
  double inputLow = -1.0;
  double inputHigh = 1.0;
  double badCodeRate = 0.0;
  double uncertainCodeRate = 0.0;

  bool operator==(const ConditionProfile&) const = default;
};

void validate(const ConditionProfile& p);

struct NetworkSpec {
  std::optional<LinkSpec> defaultLink;
  std::vector<LinkSpec> links;

  bool operator==(const NetworkSpec&) const = default;
};

struct ScenarioSpec {
  std::string id = "scenario";
  std::uint64_t seed = 0;
  std::vector<ConditionProfile> profiles;
  int clientsPerProfile = 1;
  int samplesPerClient = 100;
  std::string industry = "manufacturing";
  // Generated from the profile dimension when absent.
  std::optional<AspectType> aspectType;
  std::optional<AssetType> assetType;
  NetworkSpec network;
  TaskConfig taskConfig;
  Tick processingTicks = 10;
  std::vector<CohortSearchCriteria> criteria;

  bool operator==(const ScenarioSpec&) const = default;
};

// Throws ValidationFailed.
void validate(const ScenarioSpec& spec);

struct DatasetLayout {
  AspectTypeId aspectTypeId = "readings";
  bool qualityCodes = true;
};

// x ~ U[inputLow, inputHigh]^d, y = <w, x> + b + N(0, sigma^2), one quality
// code per value, timestamps i * 1000 ms. Inputs, noise and codes use
// separate streams derived from `seed`.
Dataset gen_asset_dataset(const ConditionProfile& profile, std::size_t n, std::uint64_t seed, const DatasetLayout& layout = {});

struct ClientRecord {
  RegistrationRequest registration;
  FLTask task;
  Dataset dataset;
  std::string profile;
  Tick processingTicks = 1;
};

struct World {
  std::string scenarioId;
  AspectType aspectType;
  AssetType assetType;
  MLModelSpec modelSpec;
  std::vector<ClientRecord> clients;
  std::vector<CohortSearchCriteria> criteria;
  Network network;
  TaskConfig taskConfig;
  std::map<TaskId, std::string> groundTruth;  // task -> profile name
};

// Client i (0-based, profile-major) gets organization "org<i+1>", device
// "dev<i+1>", asset "asset<i+1>" and task "task<i+1>", numbers zero-padded to
// at least two digits. Dataset seeds depend only on (seed, client index).
// Throws ValidationFailed.
World gen_scenario(const ScenarioSpec& spec);

std::vector<std::string> preset_names();
// std::nullopt for an unknown name.
std::optional<ScenarioSpec> preset(const std::string& name, std::uint64_t seed);

void to_json(nlohmann::json& j, const ConditionProfile& p);
void from_json(const nlohmann::json& j, ConditionProfile& p);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
void from_json(const nlohmann::json& j, ScenarioSpec& s);
nlohmann::json to_json(const World& w);

}  // namespace ifl
