#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgf/history.hpp"
#include "tkgf/temporal_kg.hpp"

namespace tkgf {

enum class PromptStyle { index, lexical };

/// Prompt variations used by the timestamp-ablation experiments:
/// include_time=false drops the leading "t: " of every line, and
/// shuffle_seed (valid only without timestamps) permutes history lines
/// with a seeded, reproducible permutation.
struct PromptOptions {
  bool include_time = true;
  std::optional<std::uint64_t> shuffle_seed;
};

/// Per-prompt bijection between candidate entities and the incremental
/// numeric labels printed in the prompt. Labels are dense in [0, size()).
class LabelMap {
 public:
  /// Returns the entity's label, assigning the next free one on first use.
  int assign(EntityId entity);

  std::optional<int> label_of(EntityId entity) const;
  std::optional<EntityId> entity_of(int label) const;

  int size() const { return static_cast<int>(entity_of_.size()); }
  const std::vector<EntityId>& entities() const { return entity_of_; }

 private:
  std::unordered_map<EntityId, int> label_of_;
  std::vector<EntityId> entity_of_;
};

/// Labels are decoded from a model's first generated token, and only the
/// top 100 tokens are retained, so prompts never assign more than 100
/// distinct labels; older facts are dropped to enforce this.
inline constexpr int kMaxPromptLabels = 100;

struct Prompt {
  std::string text;  // ends with the incomplete query line, no trailing newline
  LabelMap labels;
  ForecastQuery query;  // canonical tail form
  PromptStyle style = PromptStyle::index;
};

/// Renders a history window plus query into prompt text.
///
/// One line per history fact, "t: [S, P, n. O]" (Index prints dictionary
/// ids, Lexical prints dictionary labels, inverse relations render as
/// "inverse <label>"), followed by the incomplete query line
/// "t: [S, P,". Labels are assigned in order of first appearance of each
/// distinct object entity in the rendered line order.
///
/// Throws EmptyHistoryError for an empty window and ConfigError for
/// invalid option combinations or non-canonical queries.
Prompt build_prompt(const HistoryWindow& window, const ForecastQuery& query,
                    const Dictionary& entities, const Dictionary& relations,
                    PromptStyle style, const PromptOptions& opts = {});

struct ChatMessages {
  std::string system;
  std::string user;
};

/// Packages a prompt for chat-style endpoints: a fixed system
/// instruction describing the quadruplet format and demanding a single
/// numeric label, plus the prompt text as the user message.
ChatMessages build_chat_messages(const Prompt& prompt);

/// Stable 64-bit FNV-1a fingerprint of prompt text, as 16 hex digits.
/// Used to correlate logs and to key mock-backend scripts.
std::string prompt_fingerprint(std::string_view text);

}  // namespace tkgf
