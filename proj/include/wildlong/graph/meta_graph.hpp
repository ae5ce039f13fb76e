#pragma once

#include <bitset>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wildlong/kernels/kernels.hpp"
#include "wildlong/meta/meta_model.hpp"

namespace wildlong::graph {

using meta::MetaField;

/// A graph node: (field, normalized value). Ordered by field, then value.
using NodeId = meta::GraphItem;

/// Set of meta fields, used to track which fields a walk has visited.
class FieldSet {
 public:
  FieldSet() = default;
  FieldSet(std::initializer_list<MetaField> fields) {
    for (auto f : fields) insert(f);
  }
  void insert(MetaField f) { bits_.set(static_cast<std::size_t>(f)); }
  bool contains(MetaField f) const { return bits_.test(static_cast<std::size_t>(f)); }
  std::size_t size() const { return bits_.count(); }
  friend bool operator==(const FieldSet&, const FieldSet&) = default;

 private:
  std::bitset<meta::kFieldCount> bits_;
};

struct EdgeData {
  std::uint64_t co_count = 0;
  double weight = 0.0;
  friend bool operator==(const EdgeData&, const EdgeData&) = default;
};

/// ln(co_count + epsilon). Throws InputError for co_count < 1 or epsilon <= 0.
double edge_weight(std::uint64_t co_count, double epsilon);

/// Undirected co-occurrence graph for one document type. Edges only join
/// nodes of different fields; adjacency is stored in both directions and kept
/// symmetric; every count change recomputes the weight.
class MetaGraph {
 public:
  using Adjacency = std::map<NodeId, EdgeData>;

  explicit MetaGraph(std::string doc_type, double epsilon = 1.0);

  const std::string& doc_type() const { return doc_type_; }
  double epsilon() const { return epsilon_; }
  std::uint64_t conversations_ingested() const { return conversations_; }

  /// Ingests one conversation's record. Throws InputError if the record does
  /// not list this graph's document type.
  void add_record(const meta::MetaRecord& record);

  /// Ingests one conversation's graph items: every pair from different fields
  /// gains one co-occurrence (once, even if an item repeats).
  void add_items(std::span<const NodeId> items);

  void add_node(const NodeId& node);
  /// Adds `count` co-occurrences between two nodes of different fields,
  /// creating the nodes if needed.
  void add_cooccurrence(const NodeId& a, const NodeId& b, std::uint64_t count = 1);

  /// Adds another graph's counts (same doc type and epsilon).
  void merge(const MetaGraph& other);
  /// Adds to the ingested-conversation counter (used by loaders and merges).
  void add_conversations(std::uint64_t n) { conversations_ += n; }

  bool contains(const NodeId& node) const { return adjacency_.contains(node); }
  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool empty() const { return adjacency_.empty(); }

  /// Throws InputError for an unknown node.
  const Adjacency& neighbors(const NodeId& node) const;
  std::optional<EdgeData> edge(const NodeId& a, const NodeId& b) const;
  const std::map<NodeId, Adjacency>& adjacency() const { return adjacency_; }

  /// Fields with at least one node, in canonical order.
  std::vector<MetaField> fields_present() const;
  std::vector<NodeId> nodes_in_field(MetaField field) const;

  friend bool operator==(const MetaGraph&, const MetaGraph&) = default;

 private:
  std::string doc_type_;
  double epsilon_;
  std::uint64_t conversations_ = 0;
  std::size_t edge_count_ = 0;
  std::map<NodeId, Adjacency> adjacency_;
};

/// Batch construction. Every record must list `doc_type`; epsilon > 0.
MetaGraph build_graph(std::span<const meta::MetaRecord> records, const std::string& doc_type,
                      double epsilon = 1.0);

/// Same result as build_graph, ingesting `shards` contiguous slices
/// independently (in parallel under kOpenMP) and merging in shard order.
MetaGraph build_graph_sharded(std::span<const meta::MetaRecord> records,
                              const std::string& doc_type, double epsilon, std::size_t shards,
                              kernels::Exec exec = kernels::Exec::kSerial);

/// Neighbors whose field is not in `visited`, ordered by (field, value).
std::vector<std::pair<NodeId, double>> eligible_neighbors(const MetaGraph& graph,
                                                          const NodeId& node,
                                                          const FieldSet& visited);

/// Hash over node fields and (field, field, count) edge tuples. Invariant
/// under any relabeling of node values that keeps nodes distinct.
std::uint64_t topology_hash(const MetaGraph& graph);

/// Binary graph file: header (magic, version, doc_type, epsilon, conversation
/// count, node count, edge count), node table (field id, value), edge list
/// (node index pair, count), FNV-1a trailer. Little-endian.
std::string serialize_graph(const MetaGraph& graph);
/// Throws FormatError on bad magic/version, truncation, checksum mismatch or
/// any structural violation. Nothing is returned unless the whole payload is valid.
MetaGraph load_graph(std::string_view bytes);

void save_graph(const std::filesystem::path& path, const MetaGraph& graph);
MetaGraph load_graph_file(const std::filesystem::path& path);

}  // namespace wildlong::graph
