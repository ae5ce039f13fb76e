#include "wildlong/llm/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "wildlong/hash.hpp"

namespace wildlong::llm {

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  const double scaled =
      static_cast<double>(base_backoff.count()) * std::pow(multiplier, std::max(0, attempt - 1));
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (options_.max_concurrency == 0) options_.max_concurrency = 1;
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
}

GatewayStats Gateway::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Gateway::acquire_slot() {
  std::unique_lock lock(mu_);
  slot_cv_.wait(lock, [&] { return in_flight_ < options_.max_concurrency; });
  ++in_flight_;
}

void Gateway::release_slot() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  slot_cv_.notify_one();
}

void Gateway::wait_for_rate_limit() {
  if (options_.requests_per_interval == 0) return;
  std::unique_lock lock(mu_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    while (!recent_starts_.empty() && now - recent_starts_.front() >= options_.interval) {
      recent_starts_.pop_front();
    }
    if (recent_starts_.size() < options_.requests_per_interval) {
      recent_starts_.push_back(now);
      return;
    }
    const auto wake = recent_starts_.front() + options_.interval;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

std::string Gateway::complete(const CompletionRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++stats_.requests;
  }
  const std::string prompt_hash = sha256_hex(request.prompt).substr(0, 16);
  int last_status = 0;
  std::string last_message;
  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options_.retry.backoff(attempt - 1));
    wait_for_rate_limit();
    acquire_slot();
    BackendReply reply;
    try {
      reply = backend_->send(request);
    } catch (...) {
      release_slot();
      throw;
    }
    release_slot();
    {
      std::lock_guard lock(mu_);
      ++stats_.attempts;
      if (attempt > 1) ++stats_.retries;
    }
    if (options_.log_bodies) {
      spdlog::debug("completion {} attempt {} status {} prompt={} reply={}", request.request_id,
                    attempt, reply.status, request.prompt, reply.text);
    } else {
      spdlog::debug("completion {} attempt {} status {} prompt_sha={}", request.request_id,
                    attempt, reply.status, prompt_hash);
    }
    if (reply.ok) return std::move(reply.text);

    last_status = reply.status;
    last_message = reply.message;
    if (!options_.retry.is_retryable(reply.kind)) {
      std::lock_guard lock(mu_);
      ++stats_.failures;
      throw BackendError("non-retryable backend error: " + reply.message, attempt, reply.status);
    }
    spdlog::warn("completion {} attempt {} failed ({}), retrying", request.request_id, attempt,
                 reply.message);
  }
  {
    std::lock_guard lock(mu_);
    ++stats_.failures;
  }
  throw BackendError("retry budget exhausted after " + std::to_string(options_.retry.max_attempts) +
                         " attempts: " + last_message,
                     options_.retry.max_attempts, last_status);
}

}  // namespace wildlong::llm
