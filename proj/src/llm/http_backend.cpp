#include "wildlong/llm/http_backend.hpp"

#include <httplib.h>

#include <json.hpp>

#include "wildlong/error.hpp"

namespace wildlong::llm {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("backend base URL needs a scheme: " + config_.base_url);
  }
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpBackend::id() const { return "http:" + config_.model + "@" + scheme_host_port_; }

std::string build_chat_request_body(const std::string& model, const CompletionRequest& request) {
  nlohmann::json body = {
      {"model", model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

BackendReply interpret_chat_response(int status, const std::string& body) {
  if (status == 429) return BackendReply::failure(FailureKind::kThrottled, status, "throttled");
  if (status >= 500) {
    return BackendReply::failure(FailureKind::kServerError, status,
                                 "server error " + std::to_string(status));
  }
  if (status != 200) {
    return BackendReply::failure(FailureKind::kClientError, status,
                                 "request rejected with status " + std::to_string(status));
  }
  const auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return BackendReply::failure(FailureKind::kMalformed, status, "response is not JSON");
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    return BackendReply::failure(FailureKind::kMalformed, status, "response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object() ||
      !first["message"].contains("content") || !first["message"]["content"].is_string()) {
    return BackendReply::failure(FailureKind::kMalformed, status, "choice has no message content");
  }
  auto content = first["message"]["content"].get<std::string>();
  if (content.empty()) {
    return BackendReply::failure(FailureKind::kMalformed, status, "empty message content");
  }
  return BackendReply::success(std::move(content), status);
}

BackendReply HttpBackend::send(const CompletionRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  if (!request.request_id.empty()) headers.emplace("X-Request-Id", request.request_id);

  auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                            build_chat_request_body(config_.model, request), "application/json");
  if (!result) {
    return BackendReply::failure(FailureKind::kTimeout, 0,
                                 "transport error: " + httplib::to_string(result.error()));
  }
  return interpret_chat_response(result->status, result->body);
}

}  // namespace wildlong::llm
