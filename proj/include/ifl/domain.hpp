#pragma once

// Industrial FL domain model: asset metadata, datasets, models and the
// task -> plan -> population -> cohort orchestration hierarchy.
//
// All types are plain values. Construction-time checks live in the
// validate() overloads; every module boundary that accepts external data
// (registration, scenario parsing, task submission) runs them.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ifl {

using OrganizationId = std::string;
using ClientId = std::string;  // one FL client per organization: ClientId == OrganizationId
using DeviceId = std::string;
using AssetId = std::string;
using AssetTypeId = std::string;
using AspectTypeId = std::string;
using ModelSpecId = std::string;
using TaskId = std::string;
using CohortId = std::string;
using PlanId = std::string;

using Tick = std::int64_t;

enum class DataType { Real, Integer, Boolean };

struct Variable {
  std::string name;
  std::string unit;
  DataType dataType = DataType::Real;
  double defaultValue = 0.0;
  int length = 1;
  bool qualityCode = false;

  bool operator==(const Variable&) const = default;
};

struct AspectType {
  AspectTypeId id;
  std::string name;
  std::vector<Variable> variables;

  // Number of reals in one sample: sum of variable lengths.
  std::size_t dimension() const;
  bool carries_quality_codes() const;

  bool operator==(const AspectType&) const = default;
};

struct AssetType {
  AssetTypeId id;
  std::string name;
  std::set<AspectTypeId> aspectTypeIds;
  std::optional<AssetTypeId> parentTypeId;

  bool operator==(const AssetType&) const = default;
};

struct Asset {
  AssetId id;
  AssetTypeId assetTypeId;
  std::string location;
  std::string envDescription;
  std::optional<AssetId> parentAssetId;
  DeviceId edgeDeviceId;

  bool operator==(const Asset&) const = default;
};

struct HwConfig {
  int cpuCores = 1;
  int memMb = 1;
  bool operator==(const HwConfig&) const = default;
};

struct ResourceUsage {
  double cpuLoad = 0.0;
  std::int64_t memUsedMb = 0;
  bool operator==(const ResourceUsage&) const = default;
};

struct EdgeDevice {
  DeviceId id;
  OrganizationId organizationId;
  std::string location;
  HwConfig hwConfig;
  ResourceUsage resourceUsage;

  bool operator==(const EdgeDevice&) const = default;
};

struct Sample {
  std::int64_t timestamp = 0;  // milliseconds
  std::vector<double> values;
  double target = 0.0;
  std::vector<std::uint8_t> qualityCodes;  // empty, or aligned 1:1 with values

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  AspectTypeId aspectTypeId;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  bool operator==(const Dataset&) const = default;
};

enum class Algorithm { LinearRegressionGD };

struct MLModelSpec {
  ModelSpecId id;
  Algorithm algorithm = Algorithm::LinearRegressionGD;
  int inputDim = 1;
  AspectTypeId aspectTypeId;

  bool operator==(const MLModelSpec&) const = default;
};

struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint64_t version = 0;

  std::size_t dim() const { return weights.size(); }
  bool operator==(const ModelParams&) const = default;
};

enum class TaskKind { Training, Evaluation };
enum class SyncMode { Sync, Async };

struct TaskConfig {
  double learningRate = 0.1;
  int localEpochs = 5;
  int maxRounds = 50;
  double convergenceEps = 1e-6;
  std::optional<std::int64_t> repeatEverySec;
  SyncMode mode = SyncMode::Sync;
  // Whether gradient descent updates the bias term. Frozen-bias training is
  // used for hand-checkable single-weight runs.
  bool fitBias = true;

  bool operator==(const TaskConfig&) const = default;
};

struct FLTask {
  TaskId id;
  ClientId clientId;
  ModelSpecId modelSpecId;
  AssetId assetId;
  TaskKind kind = TaskKind::Training;
  TaskConfig config;

  bool operator==(const FLTask&) const = default;
};

struct PopulationKey {
  AssetTypeId assetTypeId;
  std::vector<AspectTypeId> aspectTypeIds;  // sorted, unique

  auto operator<=>(const PopulationKey&) const = default;
  bool operator==(const PopulationKey&) const = default;
};

std::string to_string(const PopulationKey& key);

struct FLPopulation {
  PopulationKey key;
  std::set<TaskId> taskIds;
};

struct FLCohort {
  CohortId id;
  PopulationKey populationKey;
  std::set<TaskId> taskIds;
  bool isDefault = false;

  bool operator==(const FLCohort&) const = default;
};

enum class ClientStep { Preprocess, Train, Evaluate };
enum class ServerStep { FedAvgAggregate, AsyncMerge, CollectMetrics };

struct ScheduleEntry {
  DeviceId deviceId;
  Tick startTick = 0;
  Tick durationTicks = 1;

  bool operator==(const ScheduleEntry&) const = default;
};

struct FLPlan {
  PlanId id;
  std::vector<TaskId> taskIds;
  std::vector<ClientStep> clientSteps;
  ServerStep serverStep = ServerStep::FedAvgAggregate;
  std::vector<ScheduleEntry> schedule;

  bool operator==(const FLPlan&) const = default;
};

// Read-only view used to resolve the references of a task.
class MetadataResolver {
 public:
  virtual ~MetadataResolver() = default;
  virtual std::optional<Asset> find_asset(const AssetId& id) const = 0;
  virtual std::optional<AssetType> find_asset_type(const AssetTypeId& id) const = 0;
  virtual std::optional<MLModelSpec> find_model_spec(const ModelSpecId& id) const = 0;
};

// Population identity: (asset type of the task's asset, sorted aspect types of
// the model spec). Throws UnresolvedReference.
PopulationKey population_key(const FLTask& task, const MetadataResolver& catalog);

// Both the asset and the asset-type parent graphs must be forests, and an
// asset's parent must have the type named as parent of the asset's own type.
// Parents that are not part of the given lists are not followed.
// Throws CycleDetected(id) or TypeMismatch(assetId).
void validate_hierarchy(std::span<const Asset> assets, std::span<const AssetType> types);

// Throws SchemaMismatch(sampleIndex) on the first violating sample. Non-finite
// readings are allowed here; they are scored by QoI and dropped by the
// client-side preprocessing step.
void dataset_conforms(const Dataset& ds, const AspectType& at);

void validate(const Variable& v);
void validate(const AspectType& at);
void validate(const AssetType& t);
void validate(const EdgeDevice& d);
void validate(const MLModelSpec& spec, const AspectType& at);
void validate(const ModelParams& p);
void validate(const TaskConfig& cfg);

std::string_view to_string(DataType t);
std::string_view to_string(TaskKind k);
std::string_view to_string(SyncMode m);
std::string_view to_string(ClientStep s);
std::string_view to_string(ServerStep s);

}  // namespace ifl
