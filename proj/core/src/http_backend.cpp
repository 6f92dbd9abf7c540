#include "tkgf/http_backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tkgf/errors.hpp"

namespace tkgf {

namespace {

using nlohmann::json;

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /path, at least "/"
};

SplitUrl split_url(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint must be an http(s) URL: " + endpoint);
  }
  const std::size_t slash = endpoint.find('/', scheme + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

std::string read_bearer_token(const std::string& auth_env) {
  if (auth_env.empty()) return {};
  const char* value = std::getenv(auth_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw ConfigError("auth environment variable " + auth_env + " is not set");
  }
  return value;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::uint64_t backoff_with_jitter(int attempt, int base_ms) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::uint64_t exp = static_cast<std::uint64_t>(base_ms) << attempt;
  return exp + rng() % static_cast<std::uint64_t>(std::max(base_ms, 1));
}

// One blocking POST with bounded retries. A fresh client per call keeps
// the backend safe under the evaluation loop's worker threads.
json post_with_retries(const HttpConfig& config, const std::string& base_url,
                       const std::string& path, const std::string& bearer_token,
                       const json& body) {
  static std::atomic<std::uint64_t> correlation_counter{0};
  const std::string correlation_id = std::to_string(correlation_counter.fetch_add(1));

  httplib::Headers headers{{"X-Request-Id", correlation_id}};
  if (!bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + bearer_token);
  }
  const std::string payload = body.dump();

  std::string last_error;
  const int attempts = std::max(config.retries, 0) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          backoff_with_jitter(attempt - 1, config.backoff_base_ms)));
    }

    httplib::Client client(base_url);
    client.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(config.timeout_ms));

    httplib::Result res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw CapabilityError(std::string("endpoint returned unparseable JSON: ") +
                              e.what());
      }
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status)) break;
  }
  throw BackendUnavailable("request " + correlation_id + " to " + base_url + path +
                           " failed after retries (" + last_error + ")");
}

TokenDistribution parse_completion_logprobs(const json& response) {
  // Expected shape: choices[0].logprobs.top_logprobs[0] = {token: logprob, ...}
  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw CapabilityError("completion response has no choices");
  }
  const json& choice = response["choices"][0];
  if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
    throw CapabilityError("completion response carries no logprobs");
  }
  const json& logprobs = choice["logprobs"];
  if (!logprobs.contains("top_logprobs") || !logprobs["top_logprobs"].is_array() ||
      logprobs["top_logprobs"].empty()) {
    throw CapabilityError("completion response carries no top_logprobs");
  }
  const json& first_position = logprobs["top_logprobs"][0];
  if (!first_position.is_object()) {
    throw CapabilityError("top_logprobs[0] is not a token->logprob object");
  }
  std::vector<TokenEntry> entries;
  entries.reserve(first_position.size());
  for (const auto& [token, value] : first_position.items()) {
    if (!value.is_number()) continue;
    entries.push_back({token, value.get<double>()});
  }
  return TokenDistribution::from_entries(std::move(entries));
}

std::string parse_chat_completion(const json& response) {
  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw CapabilityError("chat response has no choices");
  }
  const json& choice = response["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw CapabilityError("chat response has no message content");
  }
  return choice["message"]["content"].get<std::string>();
}

}  // namespace

HttpCompletionBackend::HttpCompletionBackend(HttpConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("http backend needs an endpoint");
  if (config_.model.empty()) throw ConfigError("http backend needs a model name");
  const SplitUrl url = split_url(config_.endpoint);
  base_url_ = url.base;
  path_ = url.path;
  bearer_token_ = read_bearer_token(config_.auth_env);
}

BackendResponse HttpCompletionBackend::generate(const GenerationInput& input) {
  const json body = {
      {"model", config_.model},
      {"prompt", input.prompt.text},
      {"max_tokens", 1},
      {"temperature", 0},
      {"logprobs", static_cast<int>(kMaxDistributionEntries)},
  };
  const json response = post_with_retries(config_, base_url_, path_, bearer_token_, body);
  return BackendResponse::from_distribution(parse_completion_logprobs(response));
}

HttpChatBackend::HttpChatBackend(HttpConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("http-chat backend needs an endpoint");
  if (config_.model.empty()) throw ConfigError("http-chat backend needs a model name");
  const SplitUrl url = split_url(config_.endpoint);
  base_url_ = url.base;
  path_ = url.path;
  bearer_token_ = read_bearer_token(config_.auth_env);
}

BackendResponse HttpChatBackend::generate(const GenerationInput& input) {
  const ChatMessages messages = build_chat_messages(input.prompt);
  const json body = {
      {"model", config_.model},
      {"messages",
       {{{"role", "system"}, {"content", messages.system}},
        {{"role", "user"}, {"content", messages.user}}}},
      {"max_tokens", 16},
      {"temperature", 0},
  };
  const json response = post_with_retries(config_, base_url_, path_, bearer_token_, body);
  return BackendResponse::from_completion(parse_chat_completion(response));
}

}  // namespace tkgf
