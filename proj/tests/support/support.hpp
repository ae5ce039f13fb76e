#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wildlong/graph/meta_graph.hpp"
#include "wildlong/graph/path_sampler.hpp"
#include "wildlong/meta/meta_model.hpp"
#include "wildlong/rng.hpp"

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance suite. Oracles deliberately avoid the library's own helpers.

namespace wildlong::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "wl");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Random record for `doc_type`: each graph field gets 0..max_per_field values
/// drawn (with possible repeats) from a pool of `pool` strings per field.
meta::MetaRecord random_record(Rng& rng, const std::string& doc_type, std::size_t pool,
                               std::size_t max_per_field = 3);

meta::GraphItem item(meta::MetaField field, const std::string& value);

/// Undirected pair key "ff|value" < "ff|value" with the field index zero-padded.
using PairKey = std::pair<std::string, std::string>;

/// Per-record pair enumeration over deduplicated cross-field items.
std::map<PairKey, std::uint64_t> brute_force_cooccurrence(const std::vector<meta::MetaRecord>& records);

/// Same keys read back from a graph's adjacency (each edge once).
std::map<PairKey, std::uint64_t> graph_pair_counts(const graph::MetaGraph& g);

/// Random graph with `nodes` nodes spread over the eleven graph fields, each
/// cross-field pair joined with probability `density`, counts in [1, max_count].
graph::MetaGraph random_graph(Rng& rng, std::size_t nodes, double density, std::uint64_t max_count,
                              const std::string& doc_type = "synthetic");

/// exp(w)/sum exp over neighbors whose field is not visited, by direct
/// summation (no max subtraction).
std::map<graph::NodeId, double> softmax_oracle(const graph::MetaGraph& g, const graph::NodeId& node,
                                               const std::set<meta::MetaField>& visited);

/// Empty string when the path is valid under the walk invariants.
std::string check_path(const graph::MetaGraph& g, const graph::MetaPath& p, std::size_t max_steps);

/// Exhaustive scan: (index, similarity) maximizing |path ∩ seed|, first wins ties.
std::pair<std::size_t, std::size_t> brute_force_demonstration(
    const graph::MetaPath& path, const std::vector<meta::SeedPath>& seeds);

/// Adjusted Rand index from the contingency table.
double adjusted_rand_index(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

/// Largest-remainder apportionment computed with exact rational remainders.
std::vector<std::uint64_t> largest_remainder_oracle(std::uint64_t n, const std::vector<double>& w);

/// Quotas by repeated capping: apportion, cap any type over supply, then
/// recurse on the deficit over the uncapped types.
std::map<std::string, std::uint64_t> recursive_quota_oracle(std::uint64_t n,
                                                            const std::map<std::string, double>& target,
                                                            const std::map<std::string, std::uint64_t>& supply);

/// Text of exactly `words` whitespace-separated words.
std::string words_text(std::size_t words, const std::string& word = "tok");

/// SHA-256 of a file's bytes (via the library hash).
std::string file_digest(const std::filesystem::path& path);

/// Directory holding the hand-authored transcripts.
std::filesystem::path transcript_dir();

/// Root of the source tree (for assets).
std::filesystem::path source_dir();

}  // namespace wildlong::testing
