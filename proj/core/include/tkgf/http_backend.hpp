#pragma once

#include <cstdint>
#include <string>

#include "tkgf/backend.hpp"

namespace tkgf {

/// Connection settings for HTTP model endpoints. The bearer token is
/// read from the environment variable named by auth_env (never from
/// config files); leave auth_env empty for unauthenticated endpoints.
struct HttpConfig {
  std::string endpoint;  // e.g. http://localhost:8080/v1/completions
  std::string model;
  std::string auth_env;
  int timeout_ms = 30000;
  int max_inflight = 4;
  int retries = 3;
  int backoff_base_ms = 200;  // exponential backoff with jitter
};

/// Completion endpoint speaking a provider-agnostic JSON schema:
/// request {model, prompt, max_tokens: 1, temperature: 0, logprobs: N}
/// greedily samples one token; the response's first-position
/// top-logprobs become the TokenDistribution. Transport failures retry
/// with exponential backoff and surface as BackendUnavailable;
/// responses without logprobs raise CapabilityError.
class HttpCompletionBackend final : public Backend {
 public:
  explicit HttpCompletionBackend(HttpConfig config);

  std::string name() const override { return "http"; }
  BackendResponse generate(const GenerationInput& input) override;
  std::size_t max_concurrency() const override {
    return static_cast<std::size_t>(config_.max_inflight);
  }

 private:
  HttpConfig config_;
  std::string base_url_;
  std::string path_;
  std::string bearer_token_;
};

/// Chat endpoint for instruction-tuned models without output
/// probabilities: request {model, messages: [system, user],
/// temperature: 0}; the completion text comes back verbatim and the
/// decoder extracts its leading integer label (Hits@1 only).
class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(HttpConfig config);

  std::string name() const override { return "http-chat"; }
  BackendResponse generate(const GenerationInput& input) override;
  std::size_t max_concurrency() const override {
    return static_cast<std::size_t>(config_.max_inflight);
  }

 private:
  HttpConfig config_;
  std::string base_url_;
  std::string path_;
  std::string bearer_token_;
};

}  // namespace tkgf
