#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/rng.hpp"

namespace wildlong::graph {

struct WalkConfig {
  int max_steps = 6;
  int min_length = 4;
  int max_retries = 5;
  std::uint64_t seed = 0;

  /// Throws InputError unless 1 <= min_length <= max_steps and max_retries >= 0.
  void validate() const;
};

struct MetaPath {
  std::vector<NodeId> nodes;
  std::string source_doc_type;

  std::size_t size() const { return nodes.size(); }
  friend bool operator==(const MetaPath&, const MetaPath&) = default;
};

struct TransitionDistribution {
  std::vector<NodeId> candidates;
  std::vector<double> probabilities;
  bool empty() const { return candidates.empty(); }
};

/// Softmax over the weights of neighbors whose field is unvisited.
/// Throws InputError if `current` is not in the graph.
TransitionDistribution transition_distribution(const MetaGraph& graph, const NodeId& current,
                                               const FieldSet& visited);

/// One walk from a given start node, extended until max_steps nodes or a dead end.
MetaPath walk_from(const MetaGraph& graph, const NodeId& start, int max_steps, Rng& rng);

/// Uniform start field, uniform start node, then walk_from. Walks shorter than
/// min_length are retried up to max_retries times; the longest walk seen
/// (earliest on ties) is returned. Throws InputError on an empty graph.
MetaPath sample_path(const MetaGraph& graph, const WalkConfig& cfg, Rng& rng);

/// `count` sampled paths with exact duplicates dropped (first occurrence kept).
std::vector<MetaPath> sample_paths_batch(const MetaGraph& graph, const WalkConfig& cfg,
                                         std::size_t count, Rng& rng);

/// Splits `count` draws over `partitions` independent streams seeded with
/// derive_seed(cfg.seed, partition). Output is partition order then local
/// order, deduplicated; identical under kSerial and kOpenMP.
std::vector<MetaPath> sample_paths_partitioned(const MetaGraph& graph, const WalkConfig& cfg,
                                               std::size_t count, std::size_t partitions,
                                               kernels::Exec exec = kernels::Exec::kSerial);

/// Checks length, distinct fields and edge connectivity. Returns an empty
/// string when valid, otherwise a description of the first violation.
std::string validate_path(const MetaGraph& graph, const MetaPath& path, int max_steps);

struct Demonstration {
  const meta::SeedPath* seed = nullptr;
  std::size_t index = 0;
  std::size_t similarity = 0;
};

/// Seed with the largest node-set intersection; ties go to the earliest seed.
/// Throws InputError on an empty library.
Demonstration select_demonstration(const MetaPath& path, std::span<const meta::SeedPath> seeds);

nlohmann::json to_json(const MetaPath& path);
MetaPath meta_path_from_json(const nlohmann::json& j);

}  // namespace wildlong::graph
