#pragma once

// Canonical JSON form of the domain types. Field names match the domain
// model; enums are written as their names; absent optionals are omitted.
// from_json runs the same validation as construction.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

using nlohmann::json;

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->template get<T>();
}

NLOHMANN_JSON_SERIALIZE_ENUM(DataType, {{DataType::Real, "Real"}, {DataType::Integer, "Integer"}, {DataType::Boolean, "Boolean"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Algorithm, {{Algorithm::LinearRegressionGD, "LinearRegressionGD"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TaskKind, {{TaskKind::Training, "Training"}, {TaskKind::Evaluation, "Evaluation"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SyncMode, {{SyncMode::Sync, "Sync"}, {SyncMode::Async, "Async"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ClientStep,
                             {{ClientStep::Preprocess, "Preprocess"}, {ClientStep::Train, "Train"}, {ClientStep::Evaluate, "Evaluate"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ServerStep, {{ServerStep::FedAvgAggregate, "FedAvgAggregate"},
                                          {ServerStep::AsyncMerge, "AsyncMerge"},
                                          {ServerStep::CollectMetrics, "CollectMetrics"}})

void to_json(json& j, const Variable& v);
void from_json(const json& j, Variable& v);
void to_json(json& j, const AspectType& v);
void from_json(const json& j, AspectType& v);
void to_json(json& j, const AssetType& v);
void from_json(const json& j, AssetType& v);
void to_json(json& j, const Asset& v);
void from_json(const json& j, Asset& v);
void to_json(json& j, const EdgeDevice& v);
void from_json(const json& j, EdgeDevice& v);
void to_json(json& j, const Sample& v);
void from_json(const json& j, Sample& v);
void to_json(json& j, const Dataset& v);
void from_json(const json& j, Dataset& v);
void to_json(json& j, const MLModelSpec& v);
void from_json(const json& j, MLModelSpec& v);
void to_json(json& j, const ModelParams& v);
void from_json(const json& j, ModelParams& v);
void to_json(json& j, const TaskConfig& v);
void from_json(const json& j, TaskConfig& v);
void to_json(json& j, const FLTask& v);
void from_json(const json& j, FLTask& v);
void to_json(json& j, const PopulationKey& v);
void from_json(const json& j, PopulationKey& v);
void to_json(json& j, const FLPopulation& v);
void from_json(const json& j, FLPopulation& v);
void to_json(json& j, const FLCohort& v);
void from_json(const json& j, FLCohort& v);
void to_json(json& j, const ScheduleEntry& v);
void from_json(const json& j, ScheduleEntry& v);
void to_json(json& j, const FLPlan& v);
void from_json(const json& j, FLPlan& v);

}  // namespace ifl
