#include "ifl/learning.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ifl/error.hpp"
#include "ifl/kernels.hpp"
#include "ifl/rng.hpp"

namespace ifl {

ModelParams init_model(const MLModelSpec& spec, std::uint64_t seed) {
  if (spec.inputDim < 1) fail(ErrorCode::ValidationFailed, spec.id, "inputDim must be positive");
  rng::Engine engine(rng::derive_seed(seed, 0, "init_model"));
  ModelParams p;
  p.weights.resize(static_cast<std::size_t>(spec.inputDim));
  for (auto& w : p.weights) w = rng::uniform(engine, -0.1, 0.1);
  return p;
}

double predict(const ModelParams& p, std::span<const double> x) {
  if (x.size() != p.dim()) fail(ErrorCode::DimensionMismatch, "", fmt::format("input has {} values, model {}", x.size(), p.dim()));
  return kernels::predict_unchecked(p.weights, p.bias, x);
}

namespace {

void check_dataset(const ModelParams& p, const Dataset& ds) {
  if (ds.empty()) fail(ErrorCode::EmptyDataset, "", "dataset has no samples");
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.samples[i].values.size() != p.dim())
      fail(ErrorCode::DimensionMismatch, std::to_string(i), fmt::format("sample has {} values, model {}", ds.samples[i].values.size(), p.dim()));
}

bool finite(const ModelParams& p) {
  return std::isfinite(p.bias) && std::all_of(p.weights.begin(), p.weights.end(), [](double w) { return std::isfinite(w); });
}

}  // namespace

TrainResult local_train(const ModelParams& p, const Dataset& ds, const TaskConfig& cfg, int threads) {
  check_dataset(p, ds);
  if (cfg.localEpochs < 0) fail(ErrorCode::ValidationFailed, "", "localEpochs must be >= 0");
  const auto data = kernels::to_design_matrix(ds);
  const auto lossGrad = [&](const ModelParams& m) {
    return threads > 1 ? kernels::parallel::loss_and_gradient(m.weights, m.bias, data, threads)
                       : kernels::serial::loss_and_gradient(m.weights, m.bias, data);
  };
  const auto lossOnly = [&](const ModelParams& m) {
    return threads > 1 ? kernels::parallel::loss(m.weights, m.bias, data, threads) : kernels::serial::loss(m.weights, m.bias, data);
  };

  TrainResult out{p, {}};
  auto& q = out.params;
  for (int epoch = 0; epoch < cfg.localEpochs; ++epoch) {
    const auto lg = lossGrad(q);
    if (epoch == 0) out.metrics.initialLoss = lg.loss;
    if (!std::isfinite(lg.loss)) fail(ErrorCode::DivergenceDetected, std::to_string(epoch), "loss became non-finite");
    for (std::size_t j = 0; j < q.weights.size(); ++j) q.weights[j] -= cfg.learningRate * lg.gradWeights[j];
    if (cfg.fitBias) q.bias -= cfg.learningRate * lg.gradBias;
    out.metrics.epochsRun = epoch + 1;
    if (!finite(q)) fail(ErrorCode::DivergenceDetected, std::to_string(epoch), "parameters became non-finite");
  }
  out.metrics.finalLoss = lossOnly(q);
  if (cfg.localEpochs == 0) out.metrics.initialLoss = out.metrics.finalLoss;
  if (!std::isfinite(out.metrics.finalLoss)) fail(ErrorCode::DivergenceDetected, "", "loss became non-finite");
  q.version = p.version + 1;
  return out;
}

EvalMetrics evaluate(const ModelParams& p, const Dataset& ds) {
  check_dataset(p, ds);
  double acc = 0.0;
  for (const auto& s : ds.samples) {
    const double r = kernels::predict_unchecked(p.weights, p.bias, s.values) - s.target;
    acc += r * r;
  }
  return {acc / static_cast<double>(ds.size()), ds.size()};
}

ModelParams federated_average(std::span<const WeightedParams> updates) {
  if (updates.empty()) fail(ErrorCode::ValidationFailed, "", "no updates to aggregate");
  const std::size_t dim = updates.front().params.dim();
  double total = 0.0;
  std::uint64_t version = 0;
  for (const auto& u : updates) {
    if (u.params.dim() != dim) fail(ErrorCode::DimensionMismatch, "", fmt::format("update dimension {} != {}", u.params.dim(), dim));
    if (!(u.weight >= 0.0)) fail(ErrorCode::NotNormalized, "", "negative contribution weight");
    total += u.weight;
    version = std::max(version, u.params.version);
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance)
    fail(ErrorCode::NotNormalized, "", fmt::format("weights sum to {}", total));

  ModelParams out;
  out.weights.assign(dim, 0.0);
  for (const auto& u : updates) {
    for (std::size_t j = 0; j < dim; ++j) out.weights[j] += u.weight * u.params.weights[j];
    out.bias += u.weight * u.params.bias;
  }
  out.version = version + 1;
  return out;
}

ModelParams async_merge(const ModelParams& global, const ModelParams& update, std::uint64_t staleness, double alpha0) {
  if (global.dim() != update.dim()) fail(ErrorCode::DimensionMismatch, "", "async update dimension differs from global");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) fail(ErrorCode::ValidationFailed, "", "alpha0 must lie in (0, 1]");
  const double alpha = alpha0 / (1.0 + static_cast<double>(staleness));
  ModelParams out;
  out.weights.resize(global.dim());
  for (std::size_t j = 0; j < global.dim(); ++j) out.weights[j] = (1.0 - alpha) * global.weights[j] + alpha * update.weights[j];
  out.bias = (1.0 - alpha) * global.bias + alpha * update.bias;
  out.version = global.version + 1;
  return out;
}

double max_abs_diff(const ModelParams& a, const ModelParams& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "", "parameter dimensions differ");
  double d = std::abs(a.bias - b.bias);
  for (std::size_t j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a.weights[j] - b.weights[j]));
  return d;
}

void to_json(nlohmann::json& j, const TrainMetrics& m) {
  j = {{"initialLoss", m.initialLoss}, {"finalLoss", m.finalLoss}, {"epochsRun", m.epochsRun}};
}

void from_json(const nlohmann::json& j, TrainMetrics& m) {
  m.initialLoss = j.at("initialLoss").get<double>();
  m.finalLoss = j.at("finalLoss").get<double>();
  m.epochsRun = j.at("epochsRun").get<int>();
}

void to_json(nlohmann::json& j, const EvalMetrics& m) { j = {{"mse", m.mse}, {"sampleCount", m.sampleCount}}; }

void from_json(const nlohmann::json& j, EvalMetrics& m) {
  m.mse = j.at("mse").get<double>();
  m.sampleCount = j.at("sampleCount").get<std::uint64_t>();
}

}  // namespace ifl
