#include "tkgf/backend.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tkgf/errors.hpp"

namespace tkgf {

TokenDistribution TokenDistribution::from_entries(std::vector<TokenEntry> entries) {
  std::erase_if(entries, [](const TokenEntry& e) { return !std::isfinite(e.logprob); });
  std::stable_sort(entries.begin(), entries.end(),
                   [](const TokenEntry& a, const TokenEntry& b) {
                     return a.logprob > b.logprob;
                   });
  std::unordered_set<std::string> seen;
  std::vector<TokenEntry> unique;
  unique.reserve(entries.size());
  for (TokenEntry& entry : entries) {
    if (unique.size() == kMaxDistributionEntries) break;
    if (seen.insert(entry.token).second) unique.push_back(std::move(entry));
  }
  return TokenDistribution{std::move(unique)};
}

namespace {

struct LabelStats {
  int label = 0;
  std::size_t count = 0;
  std::size_t last_seen = 0;  // window position of the latest occurrence
};

std::vector<LabelStats> gather_stats(const HistoryWindow& window, const LabelMap& labels) {
  if (window.empty()) {
    throw EmptyHistoryError("heuristic scoring needs a non-empty history window");
  }
  std::unordered_map<int, LabelStats> by_label;
  for (std::size_t pos = 0; pos < window.facts.size(); ++pos) {
    const auto label = labels.label_of(window.facts[pos].fact.object);
    if (!label) continue;  // object fell outside the label cap
    LabelStats& stats = by_label[*label];
    stats.label = *label;
    stats.count += 1;
    stats.last_seen = pos;
  }
  if (by_label.empty()) {
    throw EmptyHistoryError("history window holds no labeled candidates");
  }
  std::vector<LabelStats> out;
  out.reserve(by_label.size());
  for (auto& [_, stats] : by_label) out.push_back(stats);
  return out;
}

TokenDistribution to_rank_distribution(std::vector<LabelStats> ordered) {
  std::vector<TokenEntry> entries;
  entries.reserve(ordered.size());
  for (std::size_t rank = 0; rank < ordered.size(); ++rank) {
    entries.push_back({std::to_string(ordered[rank].label), 0.0 - static_cast<double>(rank)});
  }
  return TokenDistribution::from_entries(std::move(entries));
}

}  // namespace

TokenDistribution frequency_score(const HistoryWindow& window, const LabelMap& labels) {
  std::vector<LabelStats> stats = gather_stats(window, labels);
  std::sort(stats.begin(), stats.end(), [](const LabelStats& a, const LabelStats& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.last_seen != b.last_seen) return a.last_seen > b.last_seen;
    return a.label < b.label;
  });
  return to_rank_distribution(std::move(stats));
}

TokenDistribution recency_score(const HistoryWindow& window, const LabelMap& labels) {
  std::vector<LabelStats> stats = gather_stats(window, labels);
  std::sort(stats.begin(), stats.end(), [](const LabelStats& a, const LabelStats& b) {
    if (a.last_seen != b.last_seen) return a.last_seen > b.last_seen;
    if (a.count != b.count) return a.count > b.count;
    return a.label < b.label;
  });
  return to_rank_distribution(std::move(stats));
}

BackendResponse MockBackend::generate(const GenerationInput& input) {
  const std::string fingerprint = prompt_fingerprint(input.prompt.text);
  const auto it = script_.by_fingerprint.find(fingerprint);
  if (it != script_.by_fingerprint.end()) return it->second;
  if (!script_.uniform_fallback) {
    throw BackendUnavailable("mock backend has no script entry for prompt " + fingerprint);
  }

  const int num_labels = input.prompt.labels.size();
  std::vector<TokenEntry> entries;
  entries.reserve(static_cast<std::size_t>(num_labels));
  const double uniform = -std::log(std::max(num_labels, 1));
  for (int label = 0; label < num_labels; ++label) {
    entries.push_back({std::to_string(label), uniform});
  }
  return BackendResponse::from_distribution(
      TokenDistribution::from_entries(std::move(entries)));
}

}  // namespace tkgf
