#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <string>
#include <thread>

#include "wildlong/pipeline/worker_pool.hpp"

using wildlong::pipeline::parallel_map;

TEST_SUITE("worker_pool") {
  TEST_CASE("results come back in index order") {
    for (std::size_t workers : {1, 2, 7, 64}) {
      const auto out = parallel_map(500, workers, [](std::size_t i) {
        if (i % 37 == 0) std::this_thread::yield();
        return i * i;
      });
      REQUIRE(out.size() == 500);
      for (std::size_t i = 0; i < 500; ++i) CHECK(out[i] == i * i);
    }
    CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
  }

  TEST_CASE("every index runs exactly once") {
    std::vector<std::atomic<int>> hits(1000);
    parallel_map(1000, 8, [&](std::size_t i) { return ++hits[i]; });
    for (auto& h : hits) CHECK(h == 1);
  }

  TEST_CASE("the lowest failing index wins") {
    try {
      parallel_map(200, 8, [](std::size_t i) -> int {
        if (i == 150 || i == 40 || i == 199) throw std::runtime_error("fail " + std::to_string(i));
        return 0;
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "fail 40");
    }
  }
}
