#include "ifl/domain_json.hpp"

#include <limits>

namespace ifl {

void to_json(json& j, const Variable& v) {
  j = json{{"name", v.name},   {"unit", v.unit},     {"dataType", v.dataType},
           {"defaultValue", v.defaultValue}, {"length", v.length}, {"qualityCode", v.qualityCode}};
}

void from_json(const json& j, Variable& v) {
  v.name = j.at("name").get<std::string>();
  v.unit = value_or<std::string>(j, "unit", "");
  v.dataType = value_or(j, "dataType", DataType::Real);
  v.defaultValue = value_or(j, "defaultValue", 0.0);
  v.length = value_or(j, "length", 1);
  v.qualityCode = value_or(j, "qualityCode", false);
  validate(v);
}

void to_json(json& j, const AspectType& v) {
  j = json{{"id", v.id}, {"name", v.name}, {"variables", v.variables}};
}

void from_json(const json& j, AspectType& v) {
  v.id = j.at("id").get<std::string>();
  v.name = value_or<std::string>(j, "name", v.id);
  v.variables = j.at("variables").get<std::vector<Variable>>();
  validate(v);
}

void to_json(json& j, const AssetType& v) {
  j = json{{"id", v.id}, {"name", v.name}, {"aspectTypeIds", v.aspectTypeIds}};
  put_optional(j, "parentTypeId", v.parentTypeId);
}

void from_json(const json& j, AssetType& v) {
  v.id = j.at("id").get<std::string>();
  v.name = value_or<std::string>(j, "name", v.id);
  v.aspectTypeIds = j.at("aspectTypeIds").get<std::set<std::string>>();
  v.parentTypeId = get_optional<std::string>(j, "parentTypeId");
  validate(v);
}

void to_json(json& j, const Asset& v) {
  j = json{{"id", v.id},
           {"assetTypeId", v.assetTypeId},
           {"location", v.location},
           {"envDescription", v.envDescription},
           {"edgeDeviceId", v.edgeDeviceId}};
  put_optional(j, "parentAssetId", v.parentAssetId);
}

void from_json(const json& j, Asset& v) {
  v.id = j.at("id").get<std::string>();
  v.assetTypeId = j.at("assetTypeId").get<std::string>();
  v.location = value_or<std::string>(j, "location", "");
  v.envDescription = value_or<std::string>(j, "envDescription", "");
  v.parentAssetId = get_optional<std::string>(j, "parentAssetId");
  v.edgeDeviceId = j.at("edgeDeviceId").get<std::string>();
}

void to_json(json& j, const EdgeDevice& v) {
  j = json{{"id", v.id},
           {"organizationId", v.organizationId},
           {"location", v.location},
           {"hwConfig", {{"cpuCores", v.hwConfig.cpuCores}, {"memMb", v.hwConfig.memMb}}},
           {"resourceUsage", {{"cpuLoad", v.resourceUsage.cpuLoad}, {"memUsedMb", v.resourceUsage.memUsedMb}}}};
}

void from_json(const json& j, EdgeDevice& v) {
  v.id = j.at("id").get<std::string>();
  v.organizationId = j.at("organizationId").get<std::string>();
  v.location = value_or<std::string>(j, "location", "");
  if (const auto hw = j.find("hwConfig"); hw != j.end()) {
    v.hwConfig.cpuCores = value_or(*hw, "cpuCores", 1);
    v.hwConfig.memMb = value_or(*hw, "memMb", 1);
  }
  if (const auto ru = j.find("resourceUsage"); ru != j.end()) {
    v.resourceUsage.cpuLoad = value_or(*ru, "cpuLoad", 0.0);
    v.resourceUsage.memUsedMb = value_or<std::int64_t>(*ru, "memUsedMb", 0);
  }
  validate(v);
}

void to_json(json& j, const Sample& v) {
  j = json{{"timestamp", v.timestamp}, {"values", v.values}, {"target", v.target}};
  if (!v.qualityCodes.empty()) j["qualityCodes"] = v.qualityCodes;
}

void from_json(const json& j, Sample& v) {
  v.timestamp = j.at("timestamp").get<std::int64_t>();
  v.values.clear();
  // Missing readings are serialized as null.
  for (const auto& x : j.at("values"))
    v.values.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  v.target = j.at("target").get<double>();
  v.qualityCodes = value_or(j, "qualityCodes", std::vector<std::uint8_t>{});
}

void to_json(json& j, const Dataset& v) { j = json{{"aspectTypeId", v.aspectTypeId}, {"samples", v.samples}}; }

void from_json(const json& j, Dataset& v) {
  v.aspectTypeId = j.at("aspectTypeId").get<std::string>();
  v.samples = j.at("samples").get<std::vector<Sample>>();
}

void to_json(json& j, const MLModelSpec& v) {
  j = json{{"id", v.id}, {"algorithm", v.algorithm}, {"inputDim", v.inputDim}, {"aspectTypeId", v.aspectTypeId}};
}

void from_json(const json& j, MLModelSpec& v) {
  v.id = j.at("id").get<std::string>();
  v.algorithm = value_or(j, "algorithm", Algorithm::LinearRegressionGD);
  v.inputDim = j.at("inputDim").get<int>();
  v.aspectTypeId = j.at("aspectTypeId").get<std::string>();
}

void to_json(json& j, const ModelParams& v) {
  j = json{{"weights", v.weights}, {"bias", v.bias}, {"version", v.version}};
}

void from_json(const json& j, ModelParams& v) {
  v.weights = j.at("weights").get<std::vector<double>>();
  v.bias = j.at("bias").get<double>();
  v.version = value_or<std::uint64_t>(j, "version", 0);
  validate(v);
}

void to_json(json& j, const TaskConfig& v) {
  j = json{{"learningRate", v.learningRate}, {"localEpochs", v.localEpochs},       {"maxRounds", v.maxRounds},
           {"convergenceEps", v.convergenceEps}, {"mode", v.mode}, {"fitBias", v.fitBias}};
  put_optional(j, "repeatEverySec", v.repeatEverySec);
}

void from_json(const json& j, TaskConfig& v) {
  const TaskConfig defaults;
  v.learningRate = value_or(j, "learningRate", defaults.learningRate);
  v.localEpochs = value_or(j, "localEpochs", defaults.localEpochs);
  v.maxRounds = value_or(j, "maxRounds", defaults.maxRounds);
  v.convergenceEps = value_or(j, "convergenceEps", defaults.convergenceEps);
  v.repeatEverySec = get_optional<std::int64_t>(j, "repeatEverySec");
  v.mode = value_or(j, "mode", defaults.mode);
  v.fitBias = value_or(j, "fitBias", defaults.fitBias);
  validate(v);
}

void to_json(json& j, const FLTask& v) {
  j = json{{"id", v.id},           {"clientId", v.clientId}, {"modelSpecId", v.modelSpecId},
           {"assetId", v.assetId}, {"kind", v.kind},         {"config", v.config}};
}

void from_json(const json& j, FLTask& v) {
  v.id = j.at("id").get<std::string>();
  v.clientId = j.at("clientId").get<std::string>();
  v.modelSpecId = j.at("modelSpecId").get<std::string>();
  v.assetId = j.at("assetId").get<std::string>();
  v.kind = value_or(j, "kind", TaskKind::Training);
  v.config = value_or(j, "config", TaskConfig{});
}

void to_json(json& j, const PopulationKey& v) {
  j = json{{"assetTypeId", v.assetTypeId}, {"aspectTypeIds", v.aspectTypeIds}};
}

void from_json(const json& j, PopulationKey& v) {
  v.assetTypeId = j.at("assetTypeId").get<std::string>();
  v.aspectTypeIds = j.at("aspectTypeIds").get<std::vector<std::string>>();
  std::sort(v.aspectTypeIds.begin(), v.aspectTypeIds.end());
}

void to_json(json& j, const FLPopulation& v) { j = json{{"key", v.key}, {"taskIds", v.taskIds}}; }

void from_json(const json& j, FLPopulation& v) {
  v.key = j.at("key").get<PopulationKey>();
  v.taskIds = j.at("taskIds").get<std::set<std::string>>();
}

void to_json(json& j, const FLCohort& v) {
  j = json{{"id", v.id}, {"populationKey", v.populationKey}, {"taskIds", v.taskIds}, {"isDefault", v.isDefault}};
}

void from_json(const json& j, FLCohort& v) {
  v.id = j.at("id").get<std::string>();
  v.populationKey = j.at("populationKey").get<PopulationKey>();
  v.taskIds = j.at("taskIds").get<std::set<std::string>>();
  v.isDefault = value_or(j, "isDefault", false);
}

void to_json(json& j, const ScheduleEntry& v) {
  j = json{{"deviceId", v.deviceId}, {"startTick", v.startTick}, {"durationTicks", v.durationTicks}};
}

void from_json(const json& j, ScheduleEntry& v) {
  v.deviceId = j.at("deviceId").get<std::string>();
  v.startTick = value_or<Tick>(j, "startTick", 0);
  v.durationTicks = j.at("durationTicks").get<Tick>();
}

void to_json(json& j, const FLPlan& v) {
  j = json{{"id", v.id},
           {"taskIds", v.taskIds},
           {"clientSteps", v.clientSteps},
           {"serverStep", v.serverStep},
           {"schedule", v.schedule}};
}

void from_json(const json& j, FLPlan& v) {
  v.id = j.at("id").get<std::string>();
  v.taskIds = j.at("taskIds").get<std::vector<std::string>>();
  v.clientSteps = j.at("clientSteps").get<std::vector<ClientStep>>();
  v.serverStep = j.at("serverStep").get<ServerStep>();
  v.schedule = value_or(j, "schedule", std::vector<ScheduleEntry>{});
}

}  // namespace ifl
