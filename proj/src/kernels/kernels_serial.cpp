#include <cmath>
#include <limits>

#include "wildlong/kernels/kernels.hpp"

namespace wildlong::kernels {

double softmax_row(const double* x, MatrixView weights, std::span<const double> bias,
                   std::uint32_t label, double* probs) {
  const std::size_t k = weights.rows;
  const std::size_t d = weights.cols;
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double* w = weights.row(c);
    double z = bias[c];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[j];
    probs[c] = z;
    if (z > max_logit) max_logit = z;
  }
  const double label_shifted = probs[label] - max_logit;
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    probs[c] = std::exp(probs[c] - max_logit);
    total += probs[c];
  }
  for (std::size_t c = 0; c < k; ++c) probs[c] /= total;
  return std::log(total) - label_shifted;
}

namespace serial {

void assign_nearest(MatrixView points, MatrixView centroids, std::span<std::uint32_t> assignment,
                    std::span<double> dist2) {
  for (std::size_t i = 0; i < points.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
      const double d = squared_distance(points.row(i), centroids.row(c), points.cols);
      if (d < best) {
        best = d;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    assignment[i] = best_c;
    dist2[i] = best;
  }
}

void softmax_residuals(MatrixView features, MatrixView weights, std::span<const double> bias,
                       std::span<const std::uint32_t> labels, std::span<double> residual,
                       std::span<double> loss) {
  const std::size_t k = weights.rows;
  for (std::size_t i = 0; i < features.rows; ++i) {
    double* r = residual.data() + i * k;
    loss[i] = softmax_row(features.row(i), weights, bias, labels[i], r);
    r[labels[i]] -= 1.0;
  }
}

void accumulate_gradient(MatrixView features, MatrixView residual, std::span<double> grad_w,
                         std::span<double> grad_b) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  const std::size_t k = residual.cols;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += residual.row(i)[c] * features.row(i)[j];
      grad_w[c * d + j] = s * inv_n;
    }
    double sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) sb += residual.row(i)[c];
    grad_b[c] = sb * inv_n;
  }
}

}  // namespace serial
}  // namespace wildlong::kernels
