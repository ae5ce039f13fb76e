#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops shared by the taxonomy and path modules. Each
// kernel has a serial reference in `serial::` and an OpenMP version in
// `omp::` with the same signature. Both produce bitwise-identical results:
// parallelism is only over independent output cells, and every reduction runs
// in a fixed index order.

namespace wildlong::kernels {

enum class Exec { kSerial, kOpenMP };

/// Row-major matrix view.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

// assign_nearest: for every point, index of the nearest centroid (ties go to
//   the lowest index) and the squared Euclidean distance to it.
// softmax_residuals: residual(i,k) = softmax(W x_i + b)_k - [label_i == k],
//   loss(i) = -log p(label_i | x_i).
// accumulate_gradient: grad_w(k,j) = sum_i residual(i,k) x(i,j) / n,
//   grad_b(k) = sum_i residual(i,k) / n.

namespace serial {
void assign_nearest(MatrixView points, MatrixView centroids,
                    std::span<std::uint32_t> assignment, std::span<double> dist2);
void softmax_residuals(MatrixView features, MatrixView weights, std::span<const double> bias,
                       std::span<const std::uint32_t> labels, std::span<double> residual,
                       std::span<double> loss);
void accumulate_gradient(MatrixView features, MatrixView residual, std::span<double> grad_w,
                         std::span<double> grad_b);
}  // namespace serial

namespace omp {
void assign_nearest(MatrixView points, MatrixView centroids,
                    std::span<std::uint32_t> assignment, std::span<double> dist2);
void softmax_residuals(MatrixView features, MatrixView weights, std::span<const double> bias,
                       std::span<const std::uint32_t> labels, std::span<double> residual,
                       std::span<double> loss);
void accumulate_gradient(MatrixView features, MatrixView residual, std::span<double> grad_w,
                         std::span<double> grad_b);
}  // namespace omp

inline void assign_nearest(Exec exec, MatrixView points, MatrixView centroids,
                           std::span<std::uint32_t> assignment, std::span<double> dist2) {
  exec == Exec::kOpenMP ? omp::assign_nearest(points, centroids, assignment, dist2)
                        : serial::assign_nearest(points, centroids, assignment, dist2);
}

inline void softmax_residuals(Exec exec, MatrixView features, MatrixView weights,
                              std::span<const double> bias, std::span<const std::uint32_t> labels,
                              std::span<double> residual, std::span<double> loss) {
  exec == Exec::kOpenMP
      ? omp::softmax_residuals(features, weights, bias, labels, residual, loss)
      : serial::softmax_residuals(features, weights, bias, labels, residual, loss);
}

inline void accumulate_gradient(Exec exec, MatrixView features, MatrixView residual,
                                std::span<double> grad_w, std::span<double> grad_b) {
  exec == Exec::kOpenMP ? omp::accumulate_gradient(features, residual, grad_w, grad_b)
                        : serial::accumulate_gradient(features, residual, grad_w, grad_b);
}

/// Squared Euclidean distance, summed in index order.
inline double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

/// Softmax cross-entropy for a single row; writes probabilities into `probs`.
/// Returns -log probs[label]. Uses max-logit subtraction.
double softmax_row(const double* x, MatrixView weights, std::span<const double> bias,
                   std::uint32_t label, double* probs);

}  // namespace wildlong::kernels
