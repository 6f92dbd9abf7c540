#include "tkgf/decode.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>

namespace tkgf {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<int> extract_leading_integer(std::string_view completion) {
  std::string_view s = completion;
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  std::size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  if (digits == 0 || digits > 9) return std::nullopt;
  int value = 0;
  for (std::size_t i = 0; i < digits; ++i) value = value * 10 + (s[i] - '0');
  return value;
}

RankedPrediction decode(const BackendResponse& response, const LabelMap& labels) {
  RankedPrediction prediction;

  if (!response.is_distribution()) {
    const auto label = extract_leading_integer(response.completion());
    const auto entity = label ? labels.entity_of(*label) : std::nullopt;
    if (!entity) {
      prediction.no_prediction = true;
      return prediction;
    }
    prediction.ranking.emplace_back(*entity, 0.0);
    return prediction;
  }

  std::unordered_map<std::string, int> label_strings;
  label_strings.reserve(static_cast<std::size_t>(labels.size()));
  for (int label = 0; label < labels.size(); ++label) {
    label_strings.emplace(std::to_string(label), label);
  }

  struct Match {
    int label;
    double logprob;
  };
  std::unordered_map<EntityId, Match> best;
  for (const TokenEntry& entry : response.distribution().entries) {
    const auto it = label_strings.find(std::string(trim(entry.token)));
    if (it == label_strings.end()) continue;
    const int label = it->second;
    const EntityId entity = *labels.entity_of(label);
    const auto [slot, inserted] = best.try_emplace(entity, Match{label, entry.logprob});
    if (!inserted && entry.logprob > slot->second.logprob) {
      slot->second.logprob = entry.logprob;
    }
  }

  if (best.empty()) {
    prediction.no_prediction = true;
    return prediction;
  }

  struct Scored {
    EntityId entity;
    int label;
    double logprob;
  };
  std::vector<Scored> scored;
  scored.reserve(best.size());
  for (const auto& [entity, match] : best) {
    scored.push_back({entity, match.label, match.logprob});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.label < b.label;
  });

  prediction.ranking.reserve(scored.size());
  for (const Scored& s : scored) prediction.ranking.emplace_back(s.entity, s.logprob);
  return prediction;
}

}  // namespace tkgf
