#include "ifl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "ifl/error.hpp"

namespace ifl {

std::size_t AspectType::dimension() const {
  return std::accumulate(variables.begin(), variables.end(), std::size_t{0},
                         [](std::size_t acc, const Variable& v) { return acc + static_cast<std::size_t>(v.length); });
}

bool AspectType::carries_quality_codes() const {
  return std::any_of(variables.begin(), variables.end(), [](const Variable& v) { return v.qualityCode; });
}

std::string to_string(const PopulationKey& key) {
  return fmt::format("{}[{}]", key.assetTypeId, fmt::join(key.aspectTypeIds, ","));
}

PopulationKey population_key(const FLTask& task, const MetadataResolver& catalog) {
  const auto asset = catalog.find_asset(task.assetId);
  if (!asset) fail(ErrorCode::UnresolvedReference, task.assetId, "asset of task " + task.id + " not in catalog");
  const auto spec = catalog.find_model_spec(task.modelSpecId);
  if (!spec) fail(ErrorCode::UnresolvedReference, task.modelSpecId, "model spec of task " + task.id + " not in catalog");

  PopulationKey key;
  key.assetTypeId = asset->assetTypeId;
  key.aspectTypeIds = {spec->aspectTypeId};
  std::sort(key.aspectTypeIds.begin(), key.aspectTypeIds.end());
  key.aspectTypeIds.erase(std::unique(key.aspectTypeIds.begin(), key.aspectTypeIds.end()), key.aspectTypeIds.end());
  return key;
}

namespace {

// parent maps id -> optional parent id. Walks each chain, reporting the first
// node revisited on the current path.
void check_forest(const std::map<std::string, std::optional<std::string>>& parent) {
  std::map<std::string, int> state;  // 1 = on current path, 2 = done
  for (const auto& [start, unused] : parent) {
    std::vector<std::string> path;
    std::string node = start;
    while (true) {
      auto& s = state[node];
      if (s == 2) break;
      if (s == 1) fail(ErrorCode::CycleDetected, node, "parent chain loops back to " + node);
      s = 1;
      path.push_back(node);
      const auto it = parent.find(node);
      if (it == parent.end() || !it->second) break;
      if (!parent.contains(*it->second)) break;
      node = *it->second;
    }
    for (const auto& p : path) state[p] = 2;
  }
}

}  // namespace

void validate_hierarchy(std::span<const Asset> assets, std::span<const AssetType> types) {
  std::map<std::string, std::optional<std::string>> typeParent;
  std::map<AssetTypeId, const AssetType*> typeById;
  for (const auto& t : types) {
    if (!typeParent.emplace(t.id, t.parentTypeId).second)
      fail(ErrorCode::ValidationFailed, t.id, "duplicate asset type id");
    typeById[t.id] = &t;
  }
  check_forest(typeParent);

  std::map<std::string, std::optional<std::string>> assetParent;
  std::map<AssetId, const Asset*> assetById;
  for (const auto& a : assets) {
    if (!assetParent.emplace(a.id, a.parentAssetId).second)
      fail(ErrorCode::ValidationFailed, a.id, "duplicate asset id");
    assetById[a.id] = &a;
  }
  check_forest(assetParent);

  for (const auto& a : assets) {
    if (!a.parentAssetId) continue;
    const auto parent = assetById.find(*a.parentAssetId);
    const auto type = typeById.find(a.assetTypeId);
    if (parent == assetById.end() || type == typeById.end()) continue;
    const auto& expected = type->second->parentTypeId;
    if (expected && parent->second->assetTypeId != *expected) {
      fail(ErrorCode::TypeMismatch, a.id,
           fmt::format("parent {} has type {}, type {} expects parent type {}", parent->second->id,
                       parent->second->assetTypeId, a.assetTypeId, *expected));
    }
  }
}

void dataset_conforms(const Dataset& ds, const AspectType& at) {
  if (ds.aspectTypeId != at.id)
    fail(ErrorCode::SchemaMismatch, "", fmt::format("dataset aspect type {} != {}", ds.aspectTypeId, at.id));
  const std::size_t dim = at.dimension();
  const bool codes = at.carries_quality_codes();
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    const auto idx = std::to_string(i);
    if (s.values.size() != dim)
      fail(ErrorCode::SchemaMismatch, idx, fmt::format("values length {} != {}", s.values.size(), dim));
    if (s.timestamp < 0) fail(ErrorCode::SchemaMismatch, idx, "negative timestamp");
    if (i > 0 && s.timestamp <= ds.samples[i - 1].timestamp) fail(ErrorCode::SchemaMismatch, idx, "non-increasing timestamp");
    if (codes && s.qualityCodes.size() != s.values.size())
      fail(ErrorCode::SchemaMismatch, idx, "quality codes not aligned with values");
    if (!codes && !s.qualityCodes.empty()) fail(ErrorCode::SchemaMismatch, idx, "aspect type carries no quality codes");
  }
}

void validate(const Variable& v) {
  if (v.name.empty()) fail(ErrorCode::ValidationFailed, "", "variable name empty");
  if (v.length < 1) fail(ErrorCode::ValidationFailed, v.name, "variable length < 1");
  if (!std::isfinite(v.defaultValue)) fail(ErrorCode::ValidationFailed, v.name, "non-finite default value");
  if (v.dataType == DataType::Integer && v.defaultValue != std::trunc(v.defaultValue))
    fail(ErrorCode::ValidationFailed, v.name, "integer default value has a fraction");
  if (v.dataType == DataType::Boolean && v.defaultValue != 0.0 && v.defaultValue != 1.0)
    fail(ErrorCode::ValidationFailed, v.name, "boolean default value must be 0 or 1");
}

void validate(const AspectType& at) {
  if (at.id.empty()) fail(ErrorCode::ValidationFailed, "", "aspect type id empty");
  if (at.variables.empty()) fail(ErrorCode::ValidationFailed, at.id, "aspect type without variables");
  std::set<std::string> names;
  for (const auto& v : at.variables) {
    validate(v);
    if (!names.insert(v.name).second) fail(ErrorCode::ValidationFailed, at.id, "duplicate variable " + v.name);
  }
}

void validate(const AssetType& t) {
  if (t.id.empty()) fail(ErrorCode::ValidationFailed, "", "asset type id empty");
  if (t.aspectTypeIds.empty()) fail(ErrorCode::ValidationFailed, t.id, "asset type without aspect types");
  if (t.parentTypeId && *t.parentTypeId == t.id) fail(ErrorCode::CycleDetected, t.id, "asset type is its own parent");
}

void validate(const EdgeDevice& d) {
  if (d.id.empty()) fail(ErrorCode::ValidationFailed, "", "device id empty");
  if (d.hwConfig.cpuCores < 1 || d.hwConfig.memMb < 1) fail(ErrorCode::ValidationFailed, d.id, "hwConfig must be positive");
  if (!(d.resourceUsage.cpuLoad >= 0.0 && d.resourceUsage.cpuLoad <= 1.0))
    fail(ErrorCode::ValidationFailed, d.id, "cpuLoad outside [0,1]");
  if (d.resourceUsage.memUsedMb < 0 || d.resourceUsage.memUsedMb > d.hwConfig.memMb)
    fail(ErrorCode::ValidationFailed, d.id, "memUsedMb outside [0, memMb]");
}

void validate(const MLModelSpec& spec, const AspectType& at) {
  if (spec.aspectTypeId != at.id) fail(ErrorCode::ValidationFailed, spec.id, "aspect type mismatch");
  if (spec.inputDim < 1 || static_cast<std::size_t>(spec.inputDim) != at.dimension())
    fail(ErrorCode::ValidationFailed, spec.id, fmt::format("inputDim {} != aspect dimension {}", spec.inputDim, at.dimension()));
}

void validate(const ModelParams& p) {
  const bool finite = std::isfinite(p.bias) && std::all_of(p.weights.begin(), p.weights.end(), [](double w) { return std::isfinite(w); });
  if (!finite) fail(ErrorCode::ValidationFailed, "", "model params contain NaN/Inf");
}

void validate(const TaskConfig& cfg) {
  if (!(cfg.learningRate > 0.0) || !std::isfinite(cfg.learningRate)) fail(ErrorCode::ValidationFailed, "", "learningRate must be positive");
  if (cfg.localEpochs < 0) fail(ErrorCode::ValidationFailed, "", "localEpochs must be >= 0");
  if (cfg.maxRounds < 1) fail(ErrorCode::ValidationFailed, "", "maxRounds must be >= 1");
  if (!(cfg.convergenceEps > 0.0)) fail(ErrorCode::ValidationFailed, "", "convergenceEps must be > 0");
  if (cfg.repeatEverySec && *cfg.repeatEverySec <= 0) fail(ErrorCode::ValidationFailed, "", "repeatEverySec must be positive");
}

std::string_view to_string(DataType t) {
  switch (t) {
    case DataType::Real: return "Real";
    case DataType::Integer: return "Integer";
    case DataType::Boolean: return "Boolean";
  }
  return "?";
}

std::string_view to_string(TaskKind k) { return k == TaskKind::Training ? "Training" : "Evaluation"; }
std::string_view to_string(SyncMode m) { return m == SyncMode::Sync ? "Sync" : "Async"; }

std::string_view to_string(ClientStep s) {
  switch (s) {
    case ClientStep::Preprocess: return "Preprocess";
    case ClientStep::Train: return "Train";
    case ClientStep::Evaluate: return "Evaluate";
  }
  return "?";
}

std::string_view to_string(ServerStep s) {
  switch (s) {
    case ServerStep::FedAvgAggregate: return "FedAvgAggregate";
    case ServerStep::AsyncMerge: return "AsyncMerge";
    case ServerStep::CollectMetrics: return "CollectMetrics";
  }
  return "?";
}

}  // namespace ifl
