#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "tkgf/backend.hpp"
#include "tkgf/prompt.hpp"

namespace tkgf {

/// Ranked entity prediction decoded from a backend response. Entities
/// are unique, sorted by score descending with ties broken toward the
/// smaller in-prompt label. no_prediction is set when the response
/// carried no usable label token.
struct RankedPrediction {
  std::vector<std::pair<EntityId, double>> ranking;
  bool no_prediction = false;
};

/// Leading integer of a completion: skips leading whitespace, reads a
/// digit run, ignores everything after it ("3." yields 3). Returns
/// nullopt when the completion does not start with digits.
std::optional<int> extract_leading_integer(std::string_view completion);

/// Maps a backend response back into entity space via the prompt's
/// label map.
///
/// Distribution entries count only when their whitespace-trimmed text
/// equals the decimal string of an assigned label (so "1" never gets
/// credit for label 12, and "07" never matches label 7); the " 7" / "7"
/// surface forms of one label aggregate by maximum logprob. Chat
/// completions contribute a single entity via their leading integer.
RankedPrediction decode(const BackendResponse& response, const LabelMap& labels);

}  // namespace tkgf
