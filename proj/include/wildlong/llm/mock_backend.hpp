#pragma once

#include <string>

#include "wildlong/llm/gateway.hpp"

namespace wildlong::llm {

struct MockOptions {
  /// Fraction of prompts (chosen by prompt hash) that get an unparseable reply.
  double malformed_rate = 0.0;
};

/// Offline backend. The reply is a pure function of the prompt bytes: the
/// template family is detected from the prompt, and a canned response of
/// the right shape is generated from a prompt-hash-seeded stream.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockOptions options = {}) : options_(options) {}
  std::string id() const override { return "mock-v1"; }
  BackendReply send(const CompletionRequest& request) override;

  /// The deterministic reply text for a prompt.
  std::string respond(std::string_view prompt) const;

 private:
  MockOptions options_;
};

}  // namespace wildlong::llm
