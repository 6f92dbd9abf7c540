#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tkgf/history.hpp"
#include "tkgf/prompt.hpp"

namespace tkgf {

struct TokenEntry {
  std::string token;
  double logprob = 0.0;

  friend bool operator==(const TokenEntry&, const TokenEntry&) = default;
};

/// First-token probability mass as reported by a model backend:
/// at most 100 entries, unique by token text, descending by logprob.
struct TokenDistribution {
  std::vector<TokenEntry> entries;

  /// Normalizes raw entries into a valid distribution: drops non-finite
  /// logprobs, sorts descending (stable), keeps the best-scored instance
  /// of duplicate token texts, and truncates to 100 entries.
  static TokenDistribution from_entries(std::vector<TokenEntry> entries);
};

inline constexpr std::size_t kMaxDistributionEntries = 100;

/// Either a first-token distribution or, for chat endpoints that expose
/// no probabilities, a plain completion string.
class BackendResponse {
 public:
  static BackendResponse from_distribution(TokenDistribution distribution) {
    return BackendResponse(std::move(distribution));
  }
  static BackendResponse from_completion(std::string completion) {
    return BackendResponse(std::move(completion));
  }

  bool is_distribution() const {
    return std::holds_alternative<TokenDistribution>(value_);
  }
  const TokenDistribution& distribution() const {
    return std::get<TokenDistribution>(value_);
  }
  const std::string& completion() const { return std::get<std::string>(value_); }

 private:
  explicit BackendResponse(TokenDistribution d) : value_(std::move(d)) {}
  explicit BackendResponse(std::string c) : value_(std::move(c)) {}

  std::variant<TokenDistribution, std::string> value_;
};

/// Ranks each labeled history object by how often it occurs in the
/// window; ties break toward the more recent occurrence, then the
/// smaller label. Scores are pseudo-logprobs (-rank) that only encode
/// order. Throws EmptyHistoryError when nothing is scorable.
TokenDistribution frequency_score(const HistoryWindow& window, const LabelMap& labels);

/// Ranks each labeled history object by its latest occurrence; ties
/// break toward the higher count, then the smaller label.
TokenDistribution recency_score(const HistoryWindow& window, const LabelMap& labels);

struct GenerationInput {
  const Prompt& prompt;
  const HistoryWindow& window;
};

/// Uniform model-backend contract used by the evaluation loop.
/// Implementations must be safe to call from max_concurrency() threads.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  virtual BackendResponse generate(const GenerationInput& input) = 0;

  /// Upper bound on concurrent generate() calls the backend can absorb.
  virtual std::size_t max_concurrency() const { return 1; }
};

class FrequencyBackend final : public Backend {
 public:
  std::string name() const override { return "frequency"; }
  BackendResponse generate(const GenerationInput& input) override {
    return BackendResponse::from_distribution(
        frequency_score(input.window, input.prompt.labels));
  }
  std::size_t max_concurrency() const override { return 8; }
};

class RecencyBackend final : public Backend {
 public:
  std::string name() const override { return "recency"; }
  BackendResponse generate(const GenerationInput& input) override {
    return BackendResponse::from_distribution(
        recency_score(input.window, input.prompt.labels));
  }
  std::size_t max_concurrency() const override { return 8; }
};

/// Deterministic test double: answers from a fingerprint-keyed script,
/// optionally falling back to a uniform distribution over the prompt's
/// labels for unscripted prompts.
class MockBackend final : public Backend {
 public:
  struct Script {
    std::unordered_map<std::string, BackendResponse> by_fingerprint;
    bool uniform_fallback = true;
  };

  explicit MockBackend(Script script) : script_(std::move(script)) {}

  std::string name() const override { return "mock"; }
  BackendResponse generate(const GenerationInput& input) override;

 private:
  Script script_;
};

}  // namespace tkgf
