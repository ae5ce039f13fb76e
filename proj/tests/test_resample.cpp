#include <doctest.h>

#include <numeric>
#include <set>

#include "support.hpp"
#include "wildlong/error.hpp"
#include "wildlong/pipeline/resample.hpp"

using namespace wildlong;
using namespace wildlong::pipeline;

namespace {

std::vector<DocRecord> typed_docs(const std::map<std::string, std::size_t>& supply, Rng* rng = nullptr) {
  std::vector<DocRecord> docs;
  for (const auto& [type, n] : supply) {
    for (std::size_t i = 0; i < n; ++i) {
      DocRecord d;
      d.doc_id = type + "-" + std::to_string(i);
      d.doc_type = type;
      d.token_count = rng ? 2001 + uniform_index(*rng, 12000) : 5000;
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

std::map<std::string, std::uint64_t> histogram(const std::vector<DocRecord>& docs) {
  std::map<std::string, std::uint64_t> h;
  for (const auto& d : docs) ++h[*d.doc_type];
  return h;
}

}  // namespace

TEST_SUITE("resample") {
  TEST_CASE("target distribution validation") {
    CHECK_NOTHROW(TargetDistribution({{"a", 0.5}, {"b", 0.5}}));
    CHECK_THROWS_AS(TargetDistribution({{"a", 0.5}, {"b", 0.6}}), InputError);
    CHECK_THROWS_AS(TargetDistribution({{"a", -0.1}, {"b", 1.1}}), InputError);
    const auto t = TargetDistribution::from_weights({{"a", 3}, {"b", 1}});
    CHECK(t.at("a") == doctest::Approx(0.75));
    CHECK(t.at("zzz") == 0.0);
    CHECK_THROWS_AS(TargetDistribution::from_weights({{"a", 0}}), InputError);
  }

  TEST_CASE("apportion examples") {
    CHECK(apportion(100, {0.5, 0.3, 0.2}) == std::vector<std::uint64_t>{50, 30, 20});
    CHECK(apportion(10, {1, 1, 1}) == std::vector<std::uint64_t>{4, 3, 3});
    CHECK(apportion(2, {1, 1, 1}) == std::vector<std::uint64_t>{1, 1, 0});
    CHECK(apportion(5, {0, 0}) == std::vector<std::uint64_t>{0, 0});
    CHECK(apportion(0, {1, 2}) == std::vector<std::uint64_t>{0, 0});
    CHECK_THROWS_AS(apportion(3, {1, -1}), InputError);
  }

  TEST_CASE("apportion matches the exact-remainder oracle") {
    Rng rng = make_rng(101);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> w(1 + uniform_index(rng, 8));
      for (auto& x : w) x = uniform_index(rng, 4) == 0 ? 0.0 : uniform01(rng) * 10;
      if (uniform_index(rng, 4) == 0) w.assign(w.size(), 1.0);
      const auto n = uniform_index(rng, 500);
      const auto got = apportion(n, w);
      CHECK(got == testing::largest_remainder_oracle(n, w));
      if (std::accumulate(w.begin(), w.end(), 0.0) > 0) {
        CHECK(std::accumulate(got.begin(), got.end(), std::uint64_t{0}) == n);
      }
    }
  }

  TEST_CASE("quotas with ample supply and with a shortage") {
    TargetDistribution t({{"A", 0.5}, {"B", 0.3}, {"C", 0.2}});
    const std::map<std::string, std::uint64_t> ample = {{"A", 100}, {"B", 100}, {"C", 100}};
    CHECK(solve_quotas(100, t, ample) == std::map<std::string, std::uint64_t>{{"A", 50}, {"B", 30}, {"C", 20}});
    const std::map<std::string, std::uint64_t> short_b = {{"A", 100}, {"B", 10}, {"C", 100}};
    const auto q = solve_quotas(100, t, short_b);
    CHECK(q == std::map<std::string, std::uint64_t>{{"A", 64}, {"B", 10}, {"C", 26}});
    CHECK(q == testing::recursive_quota_oracle(100, t.probs(), short_b));
    CHECK_THROWS_AS(solve_quotas(100, t, {{"A", 50}, {"B", 10}, {"C", 10}}), InputError);
  }

  TEST_CASE("quotas match the recursive oracle on random instances") {
    Rng rng = make_rng(102);
    for (int i = 0; i < 3000; ++i) {
      const auto types = 1 + uniform_index(rng, 6);
      std::map<std::string, double> w;
      std::map<std::string, std::uint64_t> supply;
      for (std::uint64_t k = 0; k < types; ++k) {
        const std::string name(1, static_cast<char>('a' + k));
        w[name] = uniform_index(rng, 5) == 0 ? 0.0 : uniform01(rng);
        supply[name] = uniform_index(rng, 60);
      }
      if (std::all_of(w.begin(), w.end(), [](const auto& kv) { return kv.second == 0.0; })) w["a"] = 1.0;
      std::uint64_t total = 0;
      for (const auto& [k, s] : supply) total += s;
      if (total == 0) continue;
      const auto n = 1 + uniform_index(rng, total);
      const auto target = TargetDistribution::from_weights(w);
      const auto q = solve_quotas(n, target, supply);
      std::uint64_t sum = 0;
      for (const auto& [k, v] : q) {
        CHECK(v <= supply.at(k));
        sum += v;
      }
      CHECK(sum == n);
      CHECK(q == testing::recursive_quota_oracle(n, target.probs(), supply));
    }
  }

  TEST_CASE("target equal to the source distribution reproduces source counts") {
    const std::map<std::string, std::size_t> supply = {{"x", 37}, {"y", 13}, {"z", 50}};
    std::map<std::string, double> w;
    for (const auto& [k, v] : supply) w[k] = static_cast<double>(v);
    Rng rng = make_rng(103);
    const auto r = resample_to_distribution(typed_docs(supply), TargetDistribution::from_weights(w), 100, rng);
    CHECK(histogram(r.docs) == std::map<std::string, std::uint64_t>{{"x", 37}, {"y", 13}, {"z", 50}});
  }

  TEST_CASE("resampling histogram equals quotas, draws without replacement") {
    Rng rng = make_rng(104);
    const auto docs = typed_docs({{"A", 80}, {"B", 10}, {"C", 80}});
    TargetDistribution t({{"A", 0.5}, {"B", 0.3}, {"C", 0.2}});
    const auto r = resample_to_distribution(docs, t, 100, rng);
    CHECK(histogram(r.docs) == r.quotas);
    CHECK(r.docs.size() == 100);
    std::set<std::string> ids;
    for (const auto& d : r.docs) ids.insert(d.doc_id);
    CHECK(ids.size() == 100);

    Rng a = make_rng(5), b = make_rng(5);
    const auto x = resample_to_distribution(docs, t, 60, a);
    const auto y = resample_to_distribution(docs, t, 60, b);
    REQUIRE(x.docs.size() == y.docs.size());
    for (std::size_t i = 0; i < x.docs.size(); ++i) CHECK(x.docs[i].doc_id == y.docs[i].doc_id);

    auto untyped = docs;
    untyped[3].doc_type.reset();
    CHECK_THROWS_AS(resample_to_distribution(untyped, t, 10, rng), InputError);
    CHECK_THROWS_AS(resample_to_distribution(docs, t, 0, rng), InputError);
    CHECK_THROWS_AS(resample_to_distribution(docs, t, 171, rng), InputError);
  }

  TEST_CASE("within-type draws are uniform") {
    const auto docs = typed_docs({{"A", 10}});
    TargetDistribution t({{"A", 1.0}});
    std::map<std::string, int> hits;
    Rng rng = make_rng(105);
    for (int i = 0; i < 20000; ++i) {
      for (const auto& d : resample_to_distribution(docs, t, 3, rng).docs) ++hits[d.doc_id];
    }
    for (const auto& [id, h] : hits) CHECK(std::abs(h - 6000) < 300);
  }

  TEST_CASE("pairing examples") {
    Rng rng = make_rng(106);
    std::vector<DocRecord> two = typed_docs({{"A", 2}});
    two[0].token_count = 8000;
    two[1].token_count = 9000;
    auto r = pair_documents(two, 20000, rng);
    CHECK(r.pairs.size() == 1);
    two[0].token_count = 15000;
    two[1].token_count = 15000;
    r = pair_documents(two, 20000, rng);
    CHECK(r.pairs.empty());
    CHECK(r.over_cap_attempts >= 1);
    CHECK_FALSE(r.rejected.empty());

    const auto lonely = typed_docs({{"solo", 1}});
    r = pair_documents(lonely, 20000, rng);
    CHECK(r.pairs.empty());
    CHECK(r.rejected.size() == 1);
  }

  TEST_CASE("pairing constraints hold on random pools") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng gen = make_rng(107, seed);
      const auto docs = typed_docs({{"A", 40}, {"B", 33}, {"C", 27}}, &gen);
      Rng rng = make_rng(108, seed);
      const auto r = pair_documents(docs, 20000, rng);
      std::set<std::string> used;
      for (const auto& p : r.pairs) {
        CHECK(p.first.doc_type == p.second.doc_type);
        CHECK(p.combined_tokens() <= 20000);
        CHECK(used.insert(p.first.doc_id).second);
        CHECK(used.insert(p.second.doc_id).second);
      }
      CHECK(r.pairs.size() > 20);
      Rng again = make_rng(108, seed);
      const auto r2 = pair_documents(docs, 20000, again);
      REQUIRE(r2.pairs.size() == r.pairs.size());
      for (std::size_t i = 0; i < r.pairs.size(); ++i) {
        CHECK(r2.pairs[i].first.doc_id == r.pairs[i].first.doc_id);
        CHECK(r2.pairs[i].second.doc_id == r.pairs[i].second.doc_id);
      }
    }
  }
}
