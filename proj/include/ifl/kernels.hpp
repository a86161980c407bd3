#pragma once

// Numeric hot loops: MSE loss/gradient over a design matrix and the pairwise
// prediction-distance matrix used for cohort similarity.
//
// `serial` is the reference implementation. `parallel` uses OpenMP and is
// deterministic regardless of thread count: the gradient reduction sums fixed
// blocks of kBlockRows samples and combines them in block order, and every
// distance-matrix cell is computed by exactly one thread.

#include <cstddef>
#include <span>
#include <vector>

#include "ifl/domain.hpp"

namespace ifl::kernels {

// Row-major samples plus targets.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;
  std::vector<double> y;

  std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
};

DesignMatrix to_design_matrix(const Dataset& ds);
DesignMatrix to_design_matrix(const std::vector<std::vector<double>>& inputs);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradWeights;
  double gradBias = 0.0;
};

inline constexpr std::size_t kBlockRows = 256;

// Shared linear-model prediction: dot(w, x) + b, dimensions pre-checked.
inline double predict_unchecked(std::span<const double> w, double b, std::span<const double> x) {
  double acc = b;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * x[j];
  return acc;
}

namespace serial {

// L = (1/n) sum r_i^2, dL/dw = (2/n) sum r_i x_i, dL/db = (2/n) sum r_i,
// with r_i = w.x_i + b - y_i.
LossGradient loss_and_gradient(std::span<const double> w, double b, const DesignMatrix& data);
double loss(std::span<const double> w, double b, const DesignMatrix& data);

// Symmetric n x n matrix (row-major) of prediction RMSE over the probe rows.
std::vector<double> distance_matrix(std::span<const ModelParams> models, const DesignMatrix& probe);

}  // namespace serial

namespace parallel {

LossGradient loss_and_gradient(std::span<const double> w, double b, const DesignMatrix& data, int threads = 0);
double loss(std::span<const double> w, double b, const DesignMatrix& data, int threads = 0);
std::vector<double> distance_matrix(std::span<const ModelParams> models, const DesignMatrix& probe, int threads = 0);

}  // namespace parallel

// Threads used when `threads` <= 0.
int default_threads();

}  // namespace ifl::kernels
