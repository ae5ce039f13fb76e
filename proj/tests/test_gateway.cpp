#include <doctest.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <thread>

#include "wildlong/error.hpp"
#include "wildlong/llm/gateway.hpp"
#include "wildlong/pipeline/worker_pool.hpp"

using namespace wildlong;
using namespace wildlong::llm;
using namespace std::chrono_literals;

namespace {

// Replies from a fixed script, then succeeds forever.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::deque<BackendReply> script, std::chrono::milliseconds delay = 0ms)
      : script_(std::move(script)), delay_(delay) {}
  std::string id() const override { return "scripted"; }
  BackendReply send(const CompletionRequest& request) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    if (delay_ > 0ms) std::this_thread::sleep_for(delay_);
    BackendReply r = BackendReply::success("ok: " + request.prompt);
    {
      std::lock_guard lock(mu_);
      calls_.push_back(std::chrono::steady_clock::now());
      if (!script_.empty()) {
        r = script_.front();
        script_.pop_front();
      }
    }
    --in_flight_;
    return r;
  }
  int peak() const { return peak_; }
  std::vector<std::chrono::steady_clock::time_point> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<BackendReply> script_;
  std::chrono::milliseconds delay_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::vector<std::chrono::steady_clock::time_point> calls_;
};

GatewayOptions fast_retry() {
  GatewayOptions o;
  o.retry.base_backoff = 1ms;
  o.retry.max_backoff = 4ms;
  return o;
}

}  // namespace

TEST_SUITE("gateway") {
  TEST_CASE("backoff is geometric and capped") {
    RetryPolicy p;
    CHECK(p.backoff(1) == 500ms);
    CHECK(p.backoff(2) == 1000ms);
    CHECK(p.backoff(3) == 2000ms);
    CHECK(p.backoff(10) == 30'000ms);
    CHECK(p.is_retryable(FailureKind::kThrottled));
    CHECK_FALSE(p.is_retryable(FailureKind::kMalformed));
    CHECK_FALSE(p.is_retryable(FailureKind::kClientError));
  }

  TEST_CASE("transient failures are retried") {
    auto b = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{
        BackendReply::failure(FailureKind::kThrottled, 429, "slow down"),
        BackendReply::failure(FailureKind::kServerError, 503, "busy")});
    Gateway gw(b, fast_retry());
    CHECK(gw.complete({"hi"}) == "ok: hi");
    const auto s = gw.stats();
    CHECK(s.requests == 1);
    CHECK(s.attempts == 3);
    CHECK(s.retries == 2);
    CHECK(s.failures == 0);
  }

  TEST_CASE("waits between attempts follow the backoff") {
    auto b = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{
        BackendReply::failure(FailureKind::kTimeout, 0, "t"), BackendReply::failure(FailureKind::kTimeout, 0, "t")});
    GatewayOptions o;
    o.retry.base_backoff = 40ms;
    Gateway gw(b, o);
    gw.complete({"x"});
    const auto c = b->calls();
    REQUIRE(c.size() == 3);
    CHECK(c[1] - c[0] >= 40ms);
    CHECK(c[2] - c[1] >= 80ms);
  }

  TEST_CASE("non-retryable failures stop immediately") {
    auto b = std::make_shared<ScriptedBackend>(
        std::deque<BackendReply>{BackendReply::failure(FailureKind::kClientError, 401, "unauthorized")});
    Gateway gw(b, fast_retry());
    try {
      gw.complete({"x"});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.attempts() == 1);
      CHECK(e.last_status() == 401);
    }
    CHECK(gw.stats().failures == 1);
  }

  TEST_CASE("retry budget exhaustion") {
    std::deque<BackendReply> script(10, BackendReply::failure(FailureKind::kServerError, 500, "down"));
    auto b = std::make_shared<ScriptedBackend>(script);
    Gateway gw(b, fast_retry());
    try {
      gw.complete({"x"});
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.attempts() == 4);
      CHECK(e.last_status() == 500);
    }
  }

  TEST_CASE("concurrency cap holds under a burst") {
    auto b = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{}, 5ms);
    GatewayOptions o;
    o.max_concurrency = 3;
    Gateway gw(b, o);
    const auto out = pipeline::parallel_map(64, 16, [&](std::size_t i) {
      return gw.complete({std::to_string(i)});
    });
    CHECK(out.size() == 64);
    CHECK(out[10] == "ok: 10");
    CHECK(b->peak() <= 3);
    CHECK(b->peak() >= 2);
  }

  TEST_CASE("rate limiter spaces request starts") {
    auto b = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{});
    GatewayOptions o;
    o.requests_per_interval = 5;
    o.interval = 100ms;
    Gateway gw(b, o);
    pipeline::parallel_map(15, 4, [&](std::size_t i) { return gw.complete({std::to_string(i)}); });
    auto c = b->calls();
    std::sort(c.begin(), c.end());
    REQUIRE(c.size() == 15);
    for (std::size_t i = 5; i < c.size(); ++i) CHECK(c[i] - c[i - 5] >= 95ms);
  }

  TEST_CASE("complete_and_parse regenerates with a higher temperature") {
    class Counting final : public Backend {
     public:
      std::string id() const override { return "counting"; }
      BackendReply send(const CompletionRequest& r) override {
        temps.push_back(r.temperature);
        return BackendReply::success(temps.size() < 3 ? "bad" : "good");
      }
      std::vector<double> temps;
    };
    auto b = std::make_shared<Counting>();
    Gateway gw(b);
    std::function<std::string(const std::string&)> parse = [](const std::string& s) {
      if (s != "good") throw ParseError("nope");
      return s;
    };
    CompletionRequest req{"p", 0.5};
    const auto r = complete_and_parse(gw, req, parse, 2, 0.2);
    CHECK(r.value == "good");
    CHECK(r.generations == 3);
    REQUIRE(b->temps.size() == 3);
    CHECK(b->temps[2] == doctest::Approx(0.9));
    b->temps.clear();
    const auto fail = complete_and_parse(gw, req, parse, 1, 0.2);
    CHECK_FALSE(fail.value.has_value());
    CHECK(fail.raw == "bad");
    CHECK_FALSE(fail.error.empty());
  }
}
