#include "wildlong/pipeline/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "wildlong/error.hpp"

namespace wildlong::pipeline {

TargetDistribution::TargetDistribution(std::map<std::string, double> probs)
    : probs_(std::move(probs)) {
  double sum = 0.0;
  for (const auto& [type, p] : probs_) {
    if (!std::isfinite(p) || p < 0.0) throw InputError("target probability for '" + type + "' is invalid");
    sum += p;
  }
  if (!probs_.empty() && std::abs(sum - 1.0) > 1e-9) {
    throw InputError("target probabilities sum to " + std::to_string(sum));
  }
}

TargetDistribution TargetDistribution::from_weights(const std::map<std::string, double>& weights) {
  double sum = 0.0;
  for (const auto& [type, w] : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("weight for '" + type + "' is invalid");
    sum += w;
  }
  if (!(sum > 0.0)) throw InputError("target weights sum to zero");
  std::map<std::string, double> probs;
  for (const auto& [type, w] : weights) probs[type] = w / sum;
  // absorb rounding so the sum check holds
  double total = 0.0;
  for (const auto& [type, p] : probs) total += p;
  probs.rbegin()->second += 1.0 - total;
  if (probs.rbegin()->second < 0.0) probs.rbegin()->second = 0.0;
  return TargetDistribution(std::move(probs));
}

double TargetDistribution::at(const std::string& type) const {
  auto it = probs_.find(type);
  return it == probs_.end() ? 0.0 : it->second;
}

std::vector<std::uint64_t> apportion(std::uint64_t n, const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InputError("apportion weights must be nonnegative");
    sum += w;
  }
  std::vector<std::uint64_t> seats(weights.size(), 0);
  if (!(sum > 0.0) || n == 0) return seats;
  std::vector<double> frac(weights.size());
  std::uint64_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / sum;
    double whole = std::floor(exact);
    // guard against exact - floor landing a hair below an integer
    if (exact - whole > 1.0 - 1e-9) whole += 1.0;
    seats[i] = static_cast<std::uint64_t>(whole);
    frac[i] = std::max(0.0, exact - whole);
    given += seats[i];
  }
  while (given > n) {
    // only reachable through the rounding guard above
    auto it = std::min_element(frac.begin(), frac.end());
    const auto i = static_cast<std::size_t>(it - frac.begin());
    if (seats[i] == 0) break;
    --seats[i];
    frac[i] = 1.0;
    --given;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; given < n; ++k) {
    const auto i = order[k % order.size()];
    if (weights[i] > 0.0) {
      ++seats[i];
      ++given;
    }
  }
  return seats;
}

std::map<std::string, std::uint64_t> solve_quotas(std::uint64_t n, const TargetDistribution& target,
                                                  const std::map<std::string, std::uint64_t>& supply) {
  std::vector<std::string> types;
  std::set<std::string> all;
  for (const auto& [t, p] : target.probs()) all.insert(t);
  for (const auto& [t, s] : supply) all.insert(t);
  types.assign(all.begin(), all.end());

  std::uint64_t total_supply = 0;
  std::vector<std::uint64_t> cap(types.size());
  std::vector<double> weight(types.size());
  for (std::size_t i = 0; i < types.size(); ++i) {
    auto it = supply.find(types[i]);
    cap[i] = it == supply.end() ? 0 : it->second;
    weight[i] = target.at(types[i]);
    total_supply += cap[i];
  }
  if (total_supply < n) {
    throw InputError("supply of " + std::to_string(total_supply) + " documents cannot fill " +
                     std::to_string(n));
  }

  auto quota = apportion(n, weight);
  if (std::accumulate(quota.begin(), quota.end(), std::uint64_t{0}) != n) {
    // target has no mass at all: fall back to supply proportions
    std::vector<double> by_supply(cap.begin(), cap.end());
    quota = apportion(n, by_supply);
  }
  std::vector<bool> capped(types.size(), false);
  for (;;) {
    std::uint64_t deficit = 0;
    for (std::size_t i = 0; i < types.size(); ++i) {
      if (quota[i] > cap[i]) {
        deficit += quota[i] - cap[i];
        quota[i] = cap[i];
        capped[i] = true;
      }
    }
    if (deficit == 0) break;
    std::vector<double> w(types.size(), 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < types.size(); ++i) {
      if (!capped[i]) {
        w[i] = weight[i];
        mass += w[i];
      }
    }
    if (!(mass > 0.0)) {
      for (std::size_t i = 0; i < types.size(); ++i) {
        w[i] = capped[i] ? 0.0 : static_cast<double>(cap[i] - quota[i]);
      }
    }
    const auto extra = apportion(deficit, w);
    for (std::size_t i = 0; i < types.size(); ++i) quota[i] += extra[i];
  }

  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < types.size(); ++i) out[types[i]] = quota[i];
  return out;
}

ResampleResult resample_to_distribution(const std::vector<DocRecord>& docs,
                                        const TargetDistribution& target, std::uint64_t n,
                                        Rng& rng) {
  if (n == 0) throw InputError("resample size must be >= 1");
  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].doc_type) throw InputError("document '" + docs[i].doc_id + "' has no type");
    by_type[*docs[i].doc_type].push_back(i);
  }
  std::map<std::string, std::uint64_t> supply;
  for (const auto& [t, idx] : by_type) supply[t] = idx.size();

  ResampleResult out;
  out.quotas = solve_quotas(n, target, supply);
  for (auto& [t, idx] : by_type) {
    const auto q = out.quotas.at(t);
    // partial Fisher-Yates: the first q positions are a uniform draw
    for (std::uint64_t k = 0; k < q; ++k) {
      const auto j = k + uniform_index(rng, idx.size() - k);
      std::swap(idx[k], idx[j]);
      out.docs.push_back(docs[idx[k]]);
    }
  }
  return out;
}

PairingResult pair_documents(const std::vector<DocRecord>& docs, std::uint64_t max_combined_tokens,
                             Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!docs[i].doc_type) throw InputError("document '" + docs[i].doc_id + "' has no type");
    by_type[*docs[i].doc_type].push_back(i);
  }
  PairingResult out;
  for (auto& [type, pool] : by_type) {
    if (pool.size() < 2) {
      out.rejected.push_back({"pair", docs[pool.front()].doc_id, "type_has_single_document", type});
      continue;
    }
    shuffle(pool, rng);
    std::vector<bool> used(pool.size(), false);
    for (std::size_t a = 0; a < pool.size(); ++a) {
      if (used[a]) continue;
      used[a] = true;
      const auto& da = docs[pool[a]];
      bool paired = false;
      for (std::size_t b = a + 1; b < pool.size(); ++b) {
        if (used[b]) continue;
        const auto& db = docs[pool[b]];
        if (da.token_count + db.token_count > max_combined_tokens) {
          ++out.over_cap_attempts;
          continue;
        }
        used[b] = true;
        out.pairs.push_back({da, db});
        paired = true;
        break;
      }
      if (!paired) {
        out.rejected.push_back({"pair", da.doc_id, "no_partner_within_cap",
                                std::to_string(da.token_count)});
      }
    }
  }
  return out;
}

}  // namespace wildlong::pipeline
