#pragma once

// Client-side training/evaluation of linear regression models and the
// server-side aggregation rules (federated averaging, staleness-decayed
// asynchronous merge).

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifl/domain.hpp"

namespace ifl {

struct TrainMetrics {
  double initialLoss = 0.0;
  double finalLoss = 0.0;
  int epochsRun = 0;

  bool operator==(const TrainMetrics&) const = default;
};

struct EvalMetrics {
  double mse = 0.0;
  std::uint64_t sampleCount = 0;

  bool operator==(const EvalMetrics&) const = default;
};

// Weights i.i.d. uniform[-0.1, 0.1], bias 0, version 0.
ModelParams init_model(const MLModelSpec& spec, std::uint64_t seed);

// dot(weights, x) + bias. Throws DimensionMismatch.
double predict(const ModelParams& p, std::span<const double> x);

struct TrainResult {
  ModelParams params;
  TrainMetrics metrics;
};

// cfg.localEpochs full-batch gradient steps on the MSE loss. `threads` > 1
// selects the OpenMP kernel. Throws EmptyDataset, DimensionMismatch,
// DivergenceDetected.
TrainResult local_train(const ModelParams& p, const Dataset& ds, const TaskConfig& cfg, int threads = 1);

// Throws EmptyDataset, DimensionMismatch.
EvalMetrics evaluate(const ModelParams& p, const Dataset& ds);

struct WeightedParams {
  ModelParams params;
  double weight = 0.0;
};

inline constexpr double kNormalizationTolerance = 1e-9;

// Elementwise sum_k weight_k * params_k; version = 1 + max input version.
// Throws DimensionMismatch, NotNormalized.
ModelParams federated_average(std::span<const WeightedParams> updates);

// alpha = alpha0 / (1 + staleness); (1 - alpha) * global + alpha * update.
ModelParams async_merge(const ModelParams& global, const ModelParams& update, std::uint64_t staleness, double alpha0);

// Max-norm of the difference over weights and bias.
double max_abs_diff(const ModelParams& a, const ModelParams& b);

void to_json(nlohmann::json& j, const TrainMetrics& m);
void from_json(const nlohmann::json& j, TrainMetrics& m);
void to_json(nlohmann::json& j, const EvalMetrics& m);
void from_json(const nlohmann::json& j, EvalMetrics& m);

}  // namespace ifl
