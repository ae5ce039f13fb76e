#include "wildlong/graph/meta_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"

namespace wildlong::graph {

double edge_weight(std::uint64_t co_count, double epsilon) {
  if (co_count < 1) throw InputError("edge weight needs a co-occurrence count >= 1");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  return std::log(static_cast<double>(co_count) + epsilon);
}

MetaGraph::MetaGraph(std::string doc_type, double epsilon)
    : doc_type_(std::move(doc_type)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw InputError("epsilon must be positive and finite");
  }
}

void MetaGraph::add_node(const NodeId& node) {
  if (!meta::graph_eligible(node.field)) {
    throw InputError("field '" + std::string(meta::field_key(node.field)) + "' is not a graph field");
  }
  adjacency_.try_emplace(node);
}

void MetaGraph::add_cooccurrence(const NodeId& a, const NodeId& b, std::uint64_t count) {
  if (a.field == b.field) throw InputError("edges must join nodes of different fields");
  if (count == 0) return;
  add_node(a);
  add_node(b);
  auto& ab = adjacency_[a][b];
  if (ab.co_count == 0) ++edge_count_;
  ab.co_count += count;
  ab.weight = edge_weight(ab.co_count, epsilon_);
  adjacency_[b][a] = ab;
}

void MetaGraph::add_items(std::span<const NodeId> items) {
  std::vector<NodeId> unique(items.begin(), items.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  for (const auto& n : unique) add_node(n);
  for (std::size_t i = 0; i < unique.size(); ++i) {
    for (std::size_t j = i + 1; j < unique.size(); ++j) {
      if (unique[i].field != unique[j].field) add_cooccurrence(unique[i], unique[j]);
    }
  }
  ++conversations_;
}

void MetaGraph::add_record(const meta::MetaRecord& record) {
  const bool listed = std::any_of(record.doc_types.begin(), record.doc_types.end(),
                                  [&](const auto& t) { return t.normalized() == doc_type_; });
  if (!listed) {
    throw InputError("record '" + record.conversation_id + "' is not of document type '" +
                     doc_type_ + "'");
  }
  add_items(meta::graph_items(record));
}

void MetaGraph::merge(const MetaGraph& other) {
  if (other.doc_type_ != doc_type_ || other.epsilon_ != epsilon_) {
    throw InputError("cannot merge graphs with different doc type or epsilon");
  }
  for (const auto& [node, adj] : other.adjacency_) {
    add_node(node);
    for (const auto& [nbr, data] : adj) {
      if (node < nbr) add_cooccurrence(node, nbr, data.co_count);
    }
  }
  conversations_ += other.conversations_;
}

const MetaGraph::Adjacency& MetaGraph::neighbors(const NodeId& node) const {
  auto it = adjacency_.find(node);
  if (it == adjacency_.end()) {
    throw InputError("unknown node (" + std::string(meta::field_key(node.field)) + ", " +
                     node.value.normalized() + ")");
  }
  return it->second;
}

std::optional<EdgeData> MetaGraph::edge(const NodeId& a, const NodeId& b) const {
  auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return std::nullopt;
  auto jt = it->second.find(b);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::vector<MetaField> MetaGraph::fields_present() const {
  std::vector<MetaField> fields;
  for (const auto& [node, adj] : adjacency_) {
    if (fields.empty() || fields.back() != node.field) fields.push_back(node.field);
  }
  return fields;
}

std::vector<NodeId> MetaGraph::nodes_in_field(MetaField field) const {
  std::vector<NodeId> out;
  for (const auto& [node, adj] : adjacency_) {
    if (node.field == field) out.push_back(node);
  }
  return out;
}

MetaGraph build_graph(std::span<const meta::MetaRecord> records, const std::string& doc_type,
                      double epsilon) {
  MetaGraph g(doc_type, epsilon);
  for (const auto& r : records) g.add_record(r);
  return g;
}

MetaGraph build_graph_sharded(std::span<const meta::MetaRecord> records,
                              const std::string& doc_type, double epsilon, std::size_t shards,
                              kernels::Exec exec) {
  shards = std::max<std::size_t>(1, std::min(shards, std::max<std::size_t>(1, records.size())));
  std::vector<MetaGraph> parts(shards, MetaGraph(doc_type, epsilon));
  const std::size_t chunk = (records.size() + shards - 1) / shards;
  std::vector<std::string> errors(shards);
  const auto n_shards = static_cast<std::int64_t>(shards);
#pragma omp parallel for schedule(static) if (exec == kernels::Exec::kOpenMP)
  for (std::int64_t s = 0; s < n_shards; ++s) {
    const auto begin = std::min(records.size(), static_cast<std::size_t>(s) * chunk);
    const auto end = std::min(records.size(), begin + chunk);
    try {
      for (auto i = begin; i < end; ++i) parts[static_cast<std::size_t>(s)].add_record(records[i]);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(s)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw InputError(e);
  }
  MetaGraph out(doc_type, epsilon);
  for (const auto& p : parts) out.merge(p);
  return out;
}

std::vector<std::pair<NodeId, double>> eligible_neighbors(const MetaGraph& graph,
                                                          const NodeId& node,
                                                          const FieldSet& visited) {
  std::vector<std::pair<NodeId, double>> out;
  for (const auto& [nbr, data] : graph.neighbors(node)) {
    if (!visited.contains(nbr.field)) out.emplace_back(nbr, data.weight);
  }
  return out;
}

std::uint64_t topology_hash(const MetaGraph& graph) {
  std::multiset<std::tuple<int, int, std::uint64_t>> edges;
  std::multiset<int> node_fields;
  for (const auto& [node, adj] : graph.adjacency()) {
    node_fields.insert(static_cast<int>(node.field));
    for (const auto& [nbr, data] : adj) {
      if (node < nbr) {
        const int a = static_cast<int>(node.field);
        const int b = static_cast<int>(nbr.field);
        edges.emplace(std::min(a, b), std::max(a, b), data.co_count);
      }
    }
  }
  std::string buf;
  for (int f : node_fields) buf += std::to_string(f) + ",";
  buf += "|";
  for (const auto& [a, b, c] : edges) {
    buf += std::to_string(a) + "-" + std::to_string(b) + ":" + std::to_string(c) + ";";
  }
  return fnv1a64(buf);
}

// ---- binary format --------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'W', 'L', 'M', 'G', 'R', 'A', 'P', 'H'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void str(std::string_view s) {
    le<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <typename T>
  T le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(bytes(le<std::uint32_t>())); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("graph payload truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_graph(const MetaGraph& graph) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.le<std::uint32_t>(kVersion);
  w.str(graph.doc_type());
  w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(graph.epsilon()));
  w.le<std::uint64_t>(graph.conversations_ingested());
  w.le<std::uint64_t>(graph.node_count());
  w.le<std::uint64_t>(graph.edge_count());

  std::map<NodeId, std::uint32_t> index;
  for (const auto& [node, adj] : graph.adjacency()) {
    index.emplace(node, static_cast<std::uint32_t>(index.size()));
    w.le<std::uint8_t>(static_cast<std::uint8_t>(node.field));
    w.str(node.value.normalized());
  }
  for (const auto& [node, adj] : graph.adjacency()) {
    const auto a = index.at(node);
    for (const auto& [nbr, data] : adj) {
      const auto b = index.at(nbr);
      if (a < b) {
        w.le<std::uint32_t>(a);
        w.le<std::uint32_t>(b);
        w.le<std::uint64_t>(data.co_count);
      }
    }
  }
  const auto checksum = fnv1a64(w.buffer());
  w.le<std::uint64_t>(checksum);
  return std::move(w.buffer());
}

MetaGraph load_graph(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 8) throw FormatError("graph payload truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("not a graph file");
  Reader r(bytes.substr(sizeof(kMagic)));
  const auto version = r.le<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported graph version " + std::to_string(version));
  }
  {
    const auto body = bytes.substr(0, bytes.size() - 8);
    Reader tail(bytes.substr(bytes.size() - 8));
    if (tail.le<std::uint64_t>() != fnv1a64(body)) throw FormatError("graph checksum mismatch");
  }
  std::string doc_type = r.str();
  const double epsilon = std::bit_cast<double>(r.le<std::uint64_t>());
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw FormatError("graph epsilon invalid");
  const auto conversations = r.le<std::uint64_t>();
  const auto node_count = r.le<std::uint64_t>();
  const auto edge_count = r.le<std::uint64_t>();
  if (node_count > r.remaining() / 5 || edge_count > r.remaining() / 16) {
    throw FormatError("graph payload truncated");
  }

  MetaGraph g(std::move(doc_type), epsilon);
  std::vector<NodeId> nodes;
  nodes.reserve(node_count);
  for (std::uint64_t i = 0; i < node_count; ++i) {
    const auto field = meta::field_from_index(r.le<std::uint8_t>());
    if (!field || !meta::graph_eligible(*field)) throw FormatError("graph node has invalid field");
    const std::string value = r.str();
    auto mv = meta::try_normalize_value(value);
    if (!mv || mv->normalized() != value) throw FormatError("graph node value is not normalized");
    NodeId node{*field, *std::move(mv)};
    if (!nodes.empty() && !(nodes.back() < node)) throw FormatError("graph node table out of order");
    nodes.push_back(node);
    g.add_node(node);
  }
  std::pair<std::uint32_t, std::uint32_t> prev{0, 0};
  for (std::uint64_t e = 0; e < edge_count; ++e) {
    const auto a = r.le<std::uint32_t>();
    const auto b = r.le<std::uint32_t>();
    const auto count = r.le<std::uint64_t>();
    if (a >= b) throw FormatError("graph edge list violates symmetry (expects a < b once per pair)");
    if (b >= nodes.size()) throw FormatError("graph edge references unknown node");
    if (e > 0 && !(prev < std::make_pair(a, b))) throw FormatError("graph edge list has duplicates");
    if (count == 0) throw FormatError("graph edge has zero count");
    if (nodes[a].field == nodes[b].field) throw FormatError("graph edge joins nodes of one field");
    prev = {a, b};
    g.add_cooccurrence(nodes[a], nodes[b], count);
  }
  if (r.remaining() != 8) throw FormatError("graph payload has trailing bytes");
  g.add_conversations(conversations);
  return g;
}

void save_graph(const std::filesystem::path& path, const MetaGraph& graph) {
  write_file_atomic(path, serialize_graph(graph));
}

MetaGraph load_graph_file(const std::filesystem::path& path) { return load_graph(read_file(path)); }

}  // namespace wildlong::graph
