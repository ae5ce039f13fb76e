#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "support.hpp"
#include "wildlong/error.hpp"
#include "wildlong/hash.hpp"
#include "wildlong/jsonl.hpp"
#include "wildlong/rng.hpp"

using namespace wildlong;

TEST_SUITE("rng") {
  TEST_CASE("derived streams are reproducible and distinct") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::set<std::uint64_t> seeds;
    for (std::uint64_t base = 0; base < 20; ++base) {
      for (std::uint64_t i = 0; i < 20; ++i) seeds.insert(derive_seed(base, i));
    }
    CHECK(seeds.size() == 400);
    Rng a = make_rng(5, 3), b = make_rng(5, 3);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
  }

  TEST_CASE("uniform_index stays in range and covers it") {
    Rng rng = make_rng(9);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) {
      const auto x = uniform_index(rng, 7);
      REQUIRE(x < 7);
      ++hits[x];
    }
    for (int h : hits) CHECK(std::abs(h - 10000) < 500);
  }

  TEST_CASE("uniform01 and standard_normal moments") {
    Rng rng = make_rng(11);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = uniform01(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      const double z = standard_normal(rng);
      s += z;
      s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
  }

  TEST_CASE("sample_categorical follows the weights") {
    Rng rng = make_rng(12);
    const std::vector<double> p = {0.1, 0.0, 0.6, 0.3};
    std::vector<int> hits(4, 0);
    for (int i = 0; i < 100000; ++i) ++hits[sample_categorical(rng, p)];
    CHECK(hits[1] == 0);
    CHECK(std::abs(hits[0] / 1e5 - 0.1) < 0.01);
    CHECK(std::abs(hits[2] / 1e5 - 0.6) < 0.01);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng rng = make_rng(13);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    shuffle(v, rng);
    std::set<int> s(v.begin(), v.end());
    CHECK(s.size() == 50);
  }

  TEST_CASE("sha256 and fnv known values") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  }

  TEST_CASE("jsonl round trip, malformed lines counted") {
    testing::TempDir dir;
    const auto path = dir / "rows.jsonl";
    write_jsonl(path, {Json{{"a", 1}}, Json{{"b", "x"}}});
    {
      std::ofstream out(path, std::ios::app);
      out << "\n{not json\n[1,2]\n{\"c\":3}\n";
    }
    JsonlReadStats stats;
    const auto rows = read_jsonl_all(path, &stats);
    CHECK(rows.size() == 3);
    CHECK(stats.malformed == 2);
    CHECK(rows[2]["c"] == 3);
    CHECK_THROWS_AS(read_jsonl_all(dir / "missing.jsonl"), InputError);
  }
}
