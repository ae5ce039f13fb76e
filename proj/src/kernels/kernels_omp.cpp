#include <cmath>
#include <cstdint>
#include <limits>

#include "wildlong/kernels/kernels.hpp"

namespace wildlong::kernels::omp {

void assign_nearest(MatrixView points, MatrixView centroids, std::span<std::uint32_t> assignment,
                    std::span<double> dist2) {
  const auto n = static_cast<std::int64_t>(points.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  const auto n = static_cast<std::int64_t>(features.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
  // One output cell per iteration; the sum over samples stays sequential.
  const auto cells = static_cast<std::int64_t>(k * d);
#pragma omp parallel for schedule(static)
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    const auto c = static_cast<std::size_t>(cell) / d;
    const auto j = static_cast<std::size_t>(cell) % d;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += residual.row(i)[c] * features.row(i)[j];
    grad_w[c * d + j] = s * inv_n;
  }
  for (std::size_t c = 0; c < k; ++c) {
    double sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) sb += residual.row(i)[c];
    grad_b[c] = sb * inv_n;
  }
}

}  // namespace wildlong::kernels::omp
