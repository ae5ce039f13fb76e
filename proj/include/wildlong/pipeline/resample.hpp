#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wildlong/pipeline/corpus.hpp"
#include "wildlong/rng.hpp"

namespace wildlong::pipeline {

/// Probabilities per document type; nonnegative and summing to 1.
class TargetDistribution {
 public:
  TargetDistribution() = default;
  /// Throws InputError on negative or non-finite entries or a sum off 1 by more than 1e-9.
  explicit TargetDistribution(std::map<std::string, double> probs);
  /// Normalizes nonnegative weights. Throws InputError if they sum to zero.
  static TargetDistribution from_weights(const std::map<std::string, double>& weights);

  const std::map<std::string, double>& probs() const { return probs_; }
  double at(const std::string& type) const;
  bool empty() const { return probs_.empty(); }

 private:
  std::map<std::string, double> probs_;
};

/// Splits n seats over `weights` by largest remainder: floor(n*w/sum) each,
/// leftovers to the largest fractional parts, ties to the earlier entry.
/// All-zero weights give all zeros. Throws InputError on negative weights.
std::vector<std::uint64_t> apportion(std::uint64_t n, const std::vector<double>& weights);

/// Per-type counts summing to n. Starts from apportion(n, target); any type
/// whose quota exceeds its supply is capped and the deficit is apportioned
/// over the remaining uncapped types by target weight (by spare supply if
/// those weights are all zero), repeating until every quota fits. Types in
/// `supply` but not in `target` have weight 0. Throws InputError if the
/// total supply is below n.
std::map<std::string, std::uint64_t> solve_quotas(std::uint64_t n, const TargetDistribution& target,
                                                  const std::map<std::string, std::uint64_t>& supply);

struct ResampleResult {
  std::vector<DocRecord> docs;
  std::map<std::string, std::uint64_t> quotas;
};

/// Draws quota[t] documents of each type uniformly without replacement.
/// Output is grouped by type (in name order), draw order within a type.
/// Throws InputError on untyped documents, n == 0 or short total supply.
ResampleResult resample_to_distribution(const std::vector<DocRecord>& docs,
                                        const TargetDistribution& target, std::uint64_t n,
                                        Rng& rng);

struct DocPair {
  DocRecord first;
  DocRecord second;
  std::string doc_type() const { return first.doc_type.value_or(""); }
  std::uint64_t combined_tokens() const { return first.token_count + second.token_count; }
};

struct PairingResult {
  std::vector<DocPair> pairs;
  std::vector<Reject> rejected;
  /// Candidate pairs turned down for exceeding the combined cap.
  std::uint64_t over_cap_attempts = 0;
};

/// Same-type pairing without reuse. Within each type (name order) the pool is
/// shuffled; the head document is paired with the first later document that
/// keeps the combined count within `max_combined_tokens`. Over-cap candidates
/// stay in the pool; a head with no partner is reported unpaired.
PairingResult pair_documents(const std::vector<DocRecord>& docs, std::uint64_t max_combined_tokens,
                             Rng& rng);

}  // namespace wildlong::pipeline
