#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "wildlong/error.hpp"

namespace wildlong::llm {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  std::string request_id;
};

enum class FailureKind {
  kNone,
  kThrottled,    // HTTP 429
  kServerError,  // HTTP 5xx
  kTimeout,      // timeouts and other transport failures
  kClientError,  // other HTTP 4xx
  kMalformed,    // 200 with an unusable payload
};

struct BackendReply {
  bool ok = false;
  std::string text;
  int status = 0;
  FailureKind kind = FailureKind::kNone;
  std::string message;

  static BackendReply success(std::string text, int status = 200) {
    return {true, std::move(text), status, FailureKind::kNone, {}};
  }
  static BackendReply failure(FailureKind kind, int status, std::string message) {
    return {false, {}, status, kind, std::move(message)};
  }
};

/// One completion transport. Implementations must be safe to call from
/// several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  /// Stable identity recorded in provenance, e.g. "mock-v1".
  virtual std::string id() const = 0;
  virtual BackendReply send(const CompletionRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds max_backoff{30'000};
  double multiplier = 2.0;
  std::set<FailureKind> retryable = {FailureKind::kThrottled, FailureKind::kServerError,
                                     FailureKind::kTimeout};

  /// Delay before attempt `attempt + 1`, for attempt >= 1:
  /// min(base * multiplier^(attempt-1), max).
  std::chrono::milliseconds backoff(int attempt) const;
  bool is_retryable(FailureKind kind) const { return retryable.count(kind) > 0; }
};

struct GatewayOptions {
  RetryPolicy retry;
  /// Maximum in-flight backend calls.
  std::size_t max_concurrency = 8;
  /// At most this many request starts per `interval`; 0 disables limiting.
  std::size_t requests_per_interval = 0;
  std::chrono::milliseconds interval{1000};
  bool log_bodies = false;
};

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t attempts = 0;
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
};

/// Thread-safe front end over a Backend: retry with capped geometric backoff,
/// a concurrency cap, and a sliding-window request limiter.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  /// Returns the completion text. Throws BackendError on a non-retryable
  /// failure or when the retry budget is exhausted.
  std::string complete(const CompletionRequest& request);

  const Backend& backend() const { return *backend_; }
  std::string backend_id() const { return backend_->id(); }
  const GatewayOptions& options() const { return options_; }
  GatewayStats stats() const;

 private:
  void acquire_slot();
  void release_slot();
  void wait_for_rate_limit();

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;

  mutable std::mutex mu_;
  std::condition_variable slot_cv_;
  std::size_t in_flight_ = 0;
  std::deque<std::chrono::steady_clock::time_point> recent_starts_;
  GatewayStats stats_;
};

/// Outcome of a completion whose text must also parse.
template <typename T>
struct ParsedCompletion {
  std::optional<T> value;
  std::string raw;  // last raw completion
  std::string error;  // last parse error, empty on success
  int generations = 0;
};

/// Completes and parses, regenerating up to `parse_retries` more times with
/// the temperature raised by `temperature_bump` each time. Backend errors
/// propagate; parse errors are returned in the result.
template <typename T>
ParsedCompletion<T> complete_and_parse(Gateway& gateway, CompletionRequest request,
                                       const std::function<T(const std::string&)>& parse,
                                       int parse_retries = 2, double temperature_bump = 0.2) {
  ParsedCompletion<T> out;
  for (int attempt = 0; attempt <= parse_retries; ++attempt) {
    out.raw = gateway.complete(request);
    ++out.generations;
    try {
      out.value = parse(out.raw);
      out.error.clear();
      return out;
    } catch (const InputError& e) {
      out.error = e.what();
    }
    request.temperature += temperature_bump;
  }
  return out;
}

}  // namespace wildlong::llm
