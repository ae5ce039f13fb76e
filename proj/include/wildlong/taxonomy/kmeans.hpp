#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wildlong/kernels/kernels.hpp"

namespace wildlong::llm {
class Gateway;
}

namespace wildlong::taxonomy {

struct ClusterModel {
  std::size_t dim = 0;
  std::vector<std::vector<double>> centroids;
  /// Empty until label_clusters runs; then one distinct label per centroid.
  std::vector<std::string> labels;
  double inertia = 0.0;

  std::size_t k() const { return centroids.size(); }
  /// Nearest centroid (ties to lowest index).
  std::size_t nearest(std::span<const double> point) const;
};

struct KMeansOptions {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  int max_iters = 300;
  double tol = 1e-6;
  /// Independent seedings; the lowest final inertia wins (earliest on ties).
  int restarts = 10;
  kernels::Exec exec = kernels::Exec::kSerial;
};

struct KMeansResult {
  ClusterModel model;
  std::vector<std::uint32_t> assignment;
  /// Weighted objective after each assignment step, final one included.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;
};

/// Weighted Lloyd iterations from a greedy k-means++ start. `weights` (optional)
/// must be positive and scale each point's contribution to both the
/// objective and the centroid means. Empty clusters are reseeded with the
/// point farthest from its centroid. Throws InputError on empty input,
/// inconsistent or zero dims, non-finite values, k == 0 or k > n.
KMeansResult kmeans_fit(std::span<const std::vector<double>> points, const KMeansOptions& options,
                        std::span<const double> weights = {});

/// Up to `per_cluster` member names per cluster, nearest to the centroid first.
std::vector<std::vector<std::string>> cluster_exemplars(const KMeansResult& fit,
                                                        std::span<const std::vector<double>> points,
                                                        std::span<const std::string> names,
                                                        std::size_t per_cluster = 5);

/// Asks the backend for one label per cluster. Labels are normalized;
/// a label equal to an earlier one gets " (2)", " (3)", ... appended.
/// Backend or parse failures are rethrown with the cluster index in the message.
ClusterModel label_clusters(ClusterModel model,
                            const std::vector<std::vector<std::string>>& exemplars,
                            llm::Gateway& gateway);

/// Appends " (n)" suffixes to repeated labels, n counting from 2.
std::vector<std::string> deduplicate_labels(std::vector<std::string> labels);

nlohmann::json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);
void save_cluster_model(const std::filesystem::path& path, const ClusterModel& model);
ClusterModel load_cluster_model(const std::filesystem::path& path);

}  // namespace wildlong::taxonomy
