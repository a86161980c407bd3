#include <cmath>

#include "ifl/error.hpp"
#include "ifl/kernels.hpp"

namespace ifl::kernels {

DesignMatrix to_design_matrix(const Dataset& ds) {
  DesignMatrix m;
  m.rows = ds.size();
  m.cols = ds.empty() ? 0 : ds.samples.front().values.size();
  m.x.reserve(m.rows * m.cols);
  m.y.reserve(m.rows);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    if (s.values.size() != m.cols) fail(ErrorCode::DimensionMismatch, std::to_string(i), "ragged dataset");
    m.x.insert(m.x.end(), s.values.begin(), s.values.end());
    m.y.push_back(s.target);
  }
  return m;
}

DesignMatrix to_design_matrix(const std::vector<std::vector<double>>& inputs) {
  DesignMatrix m;
  m.rows = inputs.size();
  m.cols = inputs.empty() ? 0 : inputs.front().size();
  m.x.reserve(m.rows * m.cols);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != m.cols) fail(ErrorCode::DimensionMismatch, std::to_string(i), "ragged input list");
    m.x.insert(m.x.end(), inputs[i].begin(), inputs[i].end());
  }
  m.y.assign(m.rows, 0.0);
  return m;
}

namespace serial {

LossGradient loss_and_gradient(std::span<const double> w, double b, const DesignMatrix& data) {
  LossGradient out;
  out.gradWeights.assign(w.size(), 0.0);
  if (data.rows == 0) return out;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const auto x = data.row(i);
    const double r = predict_unchecked(w, b, x) - data.y[i];
    out.loss += r * r;
    for (std::size_t j = 0; j < w.size(); ++j) out.gradWeights[j] += r * x[j];
    out.gradBias += r;
  }
  const double n = static_cast<double>(data.rows);
  out.loss /= n;
  for (auto& g : out.gradWeights) g *= 2.0 / n;
  out.gradBias *= 2.0 / n;
  return out;
}

double loss(std::span<const double> w, double b, const DesignMatrix& data) {
  if (data.rows == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const double r = predict_unchecked(w, b, data.row(i)) - data.y[i];
    acc += r * r;
  }
  return acc / static_cast<double>(data.rows);
}

std::vector<double> distance_matrix(std::span<const ModelParams> models, const DesignMatrix& probe) {
  const std::size_t n = models.size();
  std::vector<double> d(n * n, 0.0);
  for (const auto& m : models)
    if (m.dim() != probe.cols) fail(ErrorCode::DimensionMismatch, "", "model dimension does not match probe");
  if (probe.rows == 0) return d;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < probe.rows; ++i) {
        const auto x = probe.row(i);
        const double diff = predict_unchecked(models[a].weights, models[a].bias, x) -
                            predict_unchecked(models[b].weights, models[b].bias, x);
        acc += diff * diff;
      }
      d[a * n + b] = d[b * n + a] = std::sqrt(acc / static_cast<double>(probe.rows));
    }
  }
  return d;
}

}  // namespace serial

}  // namespace ifl::kernels
