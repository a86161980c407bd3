#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ifl/error.hpp"
#include "ifl/kernels.hpp"

namespace ifl::kernels {

int default_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

namespace {

int resolve(int threads) { return threads > 0 ? threads : default_threads(); }

struct Partial {
  double loss = 0.0;
  double gradBias = 0.0;
  std::vector<double> gradWeights;
};

// Per-block partial sums; blocks are independent of the thread count so the
// final in-order combination is bitwise reproducible.
std::vector<Partial> block_partials(std::span<const double> w, double b, const DesignMatrix& data, bool withGradient,
                                    int threads) {
  const std::size_t blocks = (data.rows + kBlockRows - 1) / kBlockRows;
  std::vector<Partial> partial(blocks);
  const auto nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) num_threads(resolve(threads))
  for (long long blk = 0; blk < nblocks; ++blk) {
    auto& p = partial[static_cast<std::size_t>(blk)];
    if (withGradient) p.gradWeights.assign(w.size(), 0.0);
    const std::size_t begin = static_cast<std::size_t>(blk) * kBlockRows;
    const std::size_t end = std::min(data.rows, begin + kBlockRows);
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = data.row(i);
      const double r = predict_unchecked(w, b, x) - data.y[i];
      p.loss += r * r;
      if (withGradient) {
        for (std::size_t j = 0; j < w.size(); ++j) p.gradWeights[j] += r * x[j];
        p.gradBias += r;
      }
    }
  }
  return partial;
}

}  // namespace

LossGradient loss_and_gradient(std::span<const double> w, double b, const DesignMatrix& data, int threads) {
  LossGradient out;
  out.gradWeights.assign(w.size(), 0.0);
  if (data.rows == 0) return out;
  for (const auto& p : block_partials(w, b, data, true, threads)) {
    out.loss += p.loss;
    out.gradBias += p.gradBias;
    for (std::size_t j = 0; j < w.size(); ++j) out.gradWeights[j] += p.gradWeights[j];
  }
  const double n = static_cast<double>(data.rows);
  out.loss /= n;
  for (auto& g : out.gradWeights) g *= 2.0 / n;
  out.gradBias *= 2.0 / n;
  return out;
}

double loss(std::span<const double> w, double b, const DesignMatrix& data, int threads) {
  if (data.rows == 0) return 0.0;
  double acc = 0.0;
  for (const auto& p : block_partials(w, b, data, false, threads)) acc += p.loss;
  return acc / static_cast<double>(data.rows);
}

std::vector<double> distance_matrix(std::span<const ModelParams> models, const DesignMatrix& probe, int threads) {
  const std::size_t n = models.size();
  std::vector<double> d(n * n, 0.0);
  for (const auto& m : models)
    if (m.dim() != probe.cols) fail(ErrorCode::DimensionMismatch, "", "model dimension does not match probe");
  if (probe.rows == 0 || n == 0) return d;

  // Predictions first (n x rows), then one pass per upper-triangle cell.
  std::vector<double> pred(n * probe.rows);
  const auto nn = static_cast<long long>(n);
#pragma omp parallel num_threads(resolve(threads))
  {
#pragma omp for schedule(static)
    for (long long a = 0; a < nn; ++a)
      for (std::size_t i = 0; i < probe.rows; ++i)
        pred[static_cast<std::size_t>(a) * probe.rows + i] =
            predict_unchecked(models[a].weights, models[a].bias, probe.row(i));

#pragma omp for schedule(dynamic)
    for (long long a = 0; a < nn; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      for (std::size_t b = ua + 1; b < n; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < probe.rows; ++i) {
          const double diff = pred[ua * probe.rows + i] - pred[b * probe.rows + i];
          acc += diff * diff;
        }
        d[ua * n + b] = d[b * n + ua] = std::sqrt(acc / static_cast<double>(probe.rows));
      }
    }
  }
  return d;
}

}  // namespace parallel

}  // namespace ifl::kernels
