#include "wildlong/graph/path_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wildlong/error.hpp"

namespace wildlong::graph {

void WalkConfig::validate() const {
  if (max_steps < 1) throw InputError("max_steps must be >= 1");
  if (min_length < 1 || min_length > max_steps) {
    throw InputError("min_length must be in [1, max_steps]");
  }
  if (max_retries < 0) throw InputError("max_retries must be >= 0");
}

TransitionDistribution transition_distribution(const MetaGraph& graph, const NodeId& current,
                                               const FieldSet& visited) {
  TransitionDistribution dist;
  double max_w = -INFINITY;
  for (const auto& [nbr, data] : graph.neighbors(current)) {
    if (visited.contains(nbr.field)) continue;
    dist.candidates.push_back(nbr);
    dist.probabilities.push_back(data.weight);
    max_w = std::max(max_w, data.weight);
  }
  double total = 0.0;
  for (double& p : dist.probabilities) {
    p = std::exp(p - max_w);
    total += p;
  }
  for (double& p : dist.probabilities) p /= total;
  return dist;
}

MetaPath walk_from(const MetaGraph& graph, const NodeId& start, int max_steps, Rng& rng) {
  MetaPath path;
  path.source_doc_type = graph.doc_type();
  path.nodes.push_back(start);
  FieldSet visited{start.field};
  while (static_cast<int>(path.nodes.size()) < max_steps) {
    auto dist = transition_distribution(graph, path.nodes.back(), visited);
    if (dist.empty()) break;
    const auto pick = sample_categorical(rng, dist.probabilities);
    visited.insert(dist.candidates[pick].field);
    path.nodes.push_back(std::move(dist.candidates[pick]));
  }
  return path;
}

namespace {

MetaPath one_walk(const MetaGraph& graph, const std::vector<MetaField>& fields, int max_steps,
                  Rng& rng) {
  const MetaField field = fields[uniform_index(rng, fields.size())];
  const auto nodes = graph.nodes_in_field(field);
  return walk_from(graph, nodes[uniform_index(rng, nodes.size())], max_steps, rng);
}

}  // namespace

MetaPath sample_path(const MetaGraph& graph, const WalkConfig& cfg, Rng& rng) {
  cfg.validate();
  if (graph.empty()) throw InputError("cannot sample a path from an empty graph");
  const auto fields = graph.fields_present();
  MetaPath best = one_walk(graph, fields, cfg.max_steps, rng);
  for (int retry = 0; retry < cfg.max_retries && static_cast<int>(best.size()) < cfg.min_length;
       ++retry) {
    auto next = one_walk(graph, fields, cfg.max_steps, rng);
    if (next.size() > best.size()) best = std::move(next);
  }
  return best;
}

std::vector<MetaPath> sample_paths_batch(const MetaGraph& graph, const WalkConfig& cfg,
                                         std::size_t count, Rng& rng) {
  if (count == 0) throw InputError("path count must be >= 1");
  std::vector<MetaPath> out;
  std::set<std::vector<NodeId>> seen;
  for (std::size_t i = 0; i < count; ++i) {
    auto p = sample_path(graph, cfg, rng);
    if (seen.insert(p.nodes).second) out.push_back(std::move(p));
  }
  return out;
}

std::vector<MetaPath> sample_paths_partitioned(const MetaGraph& graph, const WalkConfig& cfg,
                                               std::size_t count, std::size_t partitions,
                                               kernels::Exec exec) {
  if (count == 0) throw InputError("path count must be >= 1");
  if (graph.empty()) throw InputError("cannot sample a path from an empty graph");
  cfg.validate();
  partitions = std::clamp<std::size_t>(partitions, 1, count);
  std::vector<std::vector<MetaPath>> local(partitions);
  const auto n_parts = static_cast<std::int64_t>(partitions);
#pragma omp parallel for schedule(dynamic, 1) if (exec == kernels::Exec::kOpenMP)
  for (std::int64_t w = 0; w < n_parts; ++w) {
    const auto wi = static_cast<std::size_t>(w);
    const std::size_t share = count / partitions + (wi < count % partitions ? 1 : 0);
    Rng rng = make_rng(cfg.seed, wi);
    local[wi].reserve(share);
    for (std::size_t i = 0; i < share; ++i) local[wi].push_back(sample_path(graph, cfg, rng));
  }
  std::vector<MetaPath> out;
  std::set<std::vector<NodeId>> seen;
  for (auto& part : local) {
    for (auto& p : part) {
      if (seen.insert(p.nodes).second) out.push_back(std::move(p));
    }
  }
  return out;
}

std::string validate_path(const MetaGraph& graph, const MetaPath& path, int max_steps) {
  if (path.nodes.empty()) return "empty path";
  if (static_cast<int>(path.nodes.size()) > max_steps) {
    return "path has " + std::to_string(path.nodes.size()) + " nodes, limit " +
           std::to_string(max_steps);
  }
  FieldSet fields;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const auto& n = path.nodes[i];
    if (!graph.contains(n)) return "node " + std::to_string(i) + " is not in the graph";
    if (fields.contains(n.field)) return "field repeated at node " + std::to_string(i);
    fields.insert(n.field);
    if (i > 0 && !graph.edge(path.nodes[i - 1], n)) {
      return "nodes " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not adjacent";
    }
  }
  return {};
}

Demonstration select_demonstration(const MetaPath& path, std::span<const meta::SeedPath> seeds) {
  if (seeds.empty()) throw InputError("seed library is empty");
  std::vector<NodeId> mine = path.nodes;
  std::sort(mine.begin(), mine.end());
  mine.erase(std::unique(mine.begin(), mine.end()), mine.end());

  Demonstration best;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::vector<NodeId> theirs = seeds[i].nodes;
    std::sort(theirs.begin(), theirs.end());
    theirs.erase(std::unique(theirs.begin(), theirs.end()), theirs.end());
    std::size_t common = 0;
    auto a = mine.begin();
    auto b = theirs.begin();
    while (a != mine.end() && b != theirs.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++common;
        ++a;
        ++b;
      }
    }
    if (i == 0 || common > best.similarity) best = {&seeds[i], i, common};
  }
  return best;
}

nlohmann::json to_json(const MetaPath& path) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : path.nodes) {
    nodes.push_back({{"field", meta::field_key(n.field)}, {"value", n.value.normalized()}});
  }
  return {{"doc_type", path.source_doc_type}, {"nodes", nodes}};
}

MetaPath meta_path_from_json(const nlohmann::json& j) {
  try {
    MetaPath p;
    p.source_doc_type = j.at("doc_type").get<std::string>();
    for (const auto& n : j.at("nodes")) {
      const auto key = n.at("field").get<std::string>();
      const auto field = meta::field_from_key(key);
      if (!field) throw FormatError("unknown field '" + key + "'");
      p.nodes.push_back({*field, meta::normalize_value(n.at("value").get<std::string>())});
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed path record: ") + e.what());
  }
}

}  // namespace wildlong::graph
