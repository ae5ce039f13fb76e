#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"

namespace wildlong::testing {

namespace fs = std::filesystem;
using meta::MetaField;

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto base = fs::temp_directory_path();
  Rng rng(std::random_device{}());
  for (;;) {
    path_ = base / fmt::format("{}-{:016x}-{}", tag, rng(), counter++);
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

meta::GraphItem item(MetaField field, const std::string& value) {
  return {field, meta::normalize_value(value)};
}

meta::MetaRecord random_record(Rng& rng, const std::string& doc_type, std::size_t pool,
                               std::size_t max_per_field) {
  meta::MetaRecord r;
  r.conversation_id = fmt::format("r{:x}", rng());
  r.doc_types.push_back(meta::normalize_value(doc_type));
  for (MetaField f : meta::kAllFields) {
    if (!meta::graph_eligible(f)) continue;
    const auto n = uniform_index(rng, max_per_field + 1);
    for (std::uint64_t i = 0; i < n; ++i) {
      r.values[f].push_back(
          meta::normalize_value(fmt::format("{} value {}", meta::field_key(f), uniform_index(rng, pool))));
    }
    if (r.values[f].empty()) r.values.erase(f);
  }
  r.simplified_instruction = "do something with the document";
  return r;
}

namespace {

std::string key_of(MetaField f, const std::string& value) {
  return fmt::format("{:02}|{}", static_cast<int>(f), value);
}

}  // namespace

std::map<PairKey, std::uint64_t> brute_force_cooccurrence(const std::vector<meta::MetaRecord>& records) {
  std::map<PairKey, std::uint64_t> counts;
  for (const auto& r : records) {
    std::set<std::string> items;
    for (const auto& [f, values] : r.values) {
      if (f == MetaField::kDocumentType || f == MetaField::kSimplifiedInstruction) continue;
      for (const auto& v : values) items.insert(key_of(f, v.normalized()));
    }
    std::vector<std::string> list(items.begin(), items.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        if (list[i].substr(0, 2) == list[j].substr(0, 2)) continue;
        ++counts[{list[i], list[j]}];
      }
    }
  }
  return counts;
}

std::map<PairKey, std::uint64_t> graph_pair_counts(const graph::MetaGraph& g) {
  std::map<PairKey, std::uint64_t> counts;
  for (const auto& [a, adj] : g.adjacency()) {
    for (const auto& [b, e] : adj) {
      auto ka = key_of(a.field, a.value.normalized());
      auto kb = key_of(b.field, b.value.normalized());
      if (ka < kb) counts[{ka, kb}] = e.co_count;
    }
  }
  return counts;
}

graph::MetaGraph random_graph(Rng& rng, std::size_t nodes, double density, std::uint64_t max_count,
                              const std::string& doc_type) {
  std::vector<MetaField> fields;
  for (MetaField f : meta::kAllFields) {
    if (meta::graph_eligible(f)) fields.push_back(f);
  }
  std::vector<meta::GraphItem> items;
  for (std::size_t i = 0; i < nodes; ++i) {
    items.push_back(item(fields[i % fields.size()], fmt::format("node {}", i)));
  }
  graph::MetaGraph g(doc_type, 1.0);
  for (const auto& n : items) g.add_node(n);
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (items[i].field == items[j].field) continue;
      if (uniform01(rng) < density) g.add_cooccurrence(items[i], items[j], 1 + uniform_index(rng, max_count));
    }
  }
  return g;
}

std::map<graph::NodeId, double> softmax_oracle(const graph::MetaGraph& g, const graph::NodeId& node,
                                               const std::set<MetaField>& visited) {
  std::map<graph::NodeId, double> out;
  double total = 0.0;
  for (const auto& [nb, e] : g.neighbors(node)) {
    if (visited.count(nb.field)) continue;
    const double x = std::exp(std::log(static_cast<double>(e.co_count) + g.epsilon()));
    out.emplace(nb, x);
    total += x;
  }
  for (auto& [nb, p] : out) p /= total;
  return out;
}

std::string check_path(const graph::MetaGraph& g, const graph::MetaPath& p, std::size_t max_steps) {
  if (p.nodes.empty()) return "empty";
  if (p.nodes.size() > max_steps) return fmt::format("length {} > {}", p.nodes.size(), max_steps);
  std::set<MetaField> seen;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    if (!g.contains(p.nodes[i])) return "unknown node";
    if (!seen.insert(p.nodes[i].field).second) return "repeated field";
    if (i > 0) {
      const auto& adj = g.adjacency().at(p.nodes[i - 1]);
      if (!adj.contains(p.nodes[i])) return "consecutive nodes not adjacent";
    }
  }
  return {};
}

std::pair<std::size_t, std::size_t> brute_force_demonstration(
    const graph::MetaPath& path, const std::vector<meta::SeedPath>& seeds) {
  std::size_t best = 0;
  std::size_t best_sim = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    std::size_t sim = 0;
    for (const auto& a : path.nodes) {
      bool hit = false;
      for (const auto& b : seeds[s].nodes) {
        if (a.field == b.field && a.value.normalized() == b.value.normalized()) hit = true;
      }
      sim += hit;
    }
    if (s == 0 || sim > best_sim) {
      best = s;
      best_sim = sim;
    }
  }
  return {best, best_sim};
}

double adjusted_rand_index(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> table;
  std::map<std::uint32_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : table) index += c2(v);
  for (const auto& [k, v] : rows) sa += c2(v);
  for (const auto& [k, v] : cols) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<std::uint64_t> largest_remainder_oracle(std::uint64_t n, const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  std::vector<std::uint64_t> seats(w.size(), 0);
  if (total <= 0) return seats;
  std::vector<long double> rem(w.size());
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const long double exact = static_cast<long double>(n) * w[i] / total;
    seats[i] = static_cast<std::uint64_t>(std::floor(exact));
    rem[i] = exact - seats[i];
    given += seats[i];
  }
  // hand out leftovers one by one to the largest remaining fraction
  while (given < n) {
    std::size_t best = w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (rem[i] < 0 || w[i] <= 0) continue;
      if (best == w.size() || rem[i] > rem[best] + 1e-12L) best = i;
    }
    ++seats[best];
    rem[best] = -1;
    ++given;
  }
  return seats;
}

std::map<std::string, std::uint64_t> recursive_quota_oracle(std::uint64_t n,
                                                            const std::map<std::string, double>& target,
                                                            const std::map<std::string, std::uint64_t>& supply) {
  std::map<std::string, std::uint64_t> quota;
  std::set<std::string> capped;
  auto weight = [&](const std::string& t) {
    auto it = target.find(t);
    return it == target.end() ? 0.0 : it->second;
  };
  // seats go to `open` by target weight (spare supply if no weight is left),
  // overflow is clipped and recursively handed to whoever is still open
  std::function<void(std::uint64_t, bool)> give = [&](std::uint64_t seats, bool first) {
    std::vector<std::string> open;
    std::vector<double> w;
    for (const auto& [t, s] : supply) {
      if (capped.count(t)) continue;
      open.push_back(t);
      w.push_back(weight(t));
    }
    if (std::none_of(w.begin(), w.end(), [](double x) { return x > 0; })) {
      for (std::size_t i = 0; i < open.size(); ++i) {
        w[i] = static_cast<double>(first ? supply.at(open[i]) : supply.at(open[i]) - quota[open[i]]);
      }
    }
    const auto q = largest_remainder_oracle(seats, w);
    for (std::size_t i = 0; i < open.size(); ++i) quota[open[i]] += q[i];
    std::uint64_t overflow = 0;
    for (const auto& t : open) {
      if (quota[t] > supply.at(t)) {
        overflow += quota[t] - supply.at(t);
        quota[t] = supply.at(t);
        capped.insert(t);
      }
    }
    if (overflow > 0) give(overflow, false);
  };
  give(n, true);
  for (const auto& [t, s] : supply) quota.try_emplace(t, 0);
  return quota;
}

std::string words_text(std::size_t words, const std::string& word) {
  std::string out;
  out.reserve(words * (word.size() + 1));
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += word;
  }
  return out;
}

std::string file_digest(const fs::path& path) { return sha256_hex(read_file(path)); }

fs::path source_dir() { return WILDLONG_SOURCE_DIR; }

fs::path transcript_dir() { return source_dir() / "tests" / "data" / "transcripts"; }

}  // namespace wildlong::testing
