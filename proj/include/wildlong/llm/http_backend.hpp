#pragma once

#include <chrono>
#include <string>

#include "wildlong/llm/gateway.hpp"

namespace wildlong::llm {

struct HttpBackendConfig {
  /// e.g. "https://api.example.com/v1" or "http://127.0.0.1:8080".
  std::string base_url;
  std::string model = "gpt-4";
  /// Bearer token; empty sends no Authorization header.
  std::string api_key;
  std::chrono::milliseconds timeout{120'000};
  bool log_bodies = false;
};

/// Chat-completion wire backend: POST {base_url}/chat/completions with a
/// single user message, reads choices[0].message.content.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string id() const override;
  BackendReply send(const CompletionRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// Request body for a completion (exposed for tests).
std::string build_chat_request_body(const std::string& model, const CompletionRequest& request);

/// Maps an HTTP status and body to a reply. 200 needs a non-empty
/// choices[0].message.content string; anything else is kMalformed.
BackendReply interpret_chat_response(int status, const std::string& body);

}  // namespace wildlong::llm
