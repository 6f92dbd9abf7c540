#include "tkgf/prompt.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "tkgf/errors.hpp"

namespace tkgf {

int LabelMap::assign(EntityId entity) {
  const auto [it, inserted] = label_of_.try_emplace(entity, size());
  if (inserted) entity_of_.push_back(entity);
  return it->second;
}

std::optional<int> LabelMap::label_of(EntityId entity) const {
  const auto it = label_of_.find(entity);
  if (it == label_of_.end()) return std::nullopt;
  return it->second;
}

std::optional<EntityId> LabelMap::entity_of(int label) const {
  if (label < 0 || label >= size()) return std::nullopt;
  return entity_of_[static_cast<std::size_t>(label)];
}

namespace {

std::string entity_text(EntityId id, const Dictionary& entities, PromptStyle style) {
  return style == PromptStyle::index ? std::to_string(id) : entities.label(id);
}

std::string relation_text(RelationId id, const Dictionary& relations, PromptStyle style) {
  if (style == PromptStyle::index) return std::to_string(id);
  const std::uint32_t num_rel = relations.size();
  if (id < num_rel) return relations.label(id);
  // Inverse relations have no surface form in the dictionary.
  return "inverse " + relations.label(id - num_rel);
}

// First window position whose suffix holds at most kMaxPromptLabels
// distinct objects. Dropping the prefix keeps the most recent facts.
std::size_t label_cap_start(const HistoryWindow& window) {
  std::unordered_set<EntityId> distinct;
  std::size_t start = window.facts.size();
  while (start > 0) {
    const EntityId object = window.facts[start - 1].fact.object;
    if (!distinct.contains(object) &&
        distinct.size() == static_cast<std::size_t>(kMaxPromptLabels)) {
      break;
    }
    distinct.insert(object);
    --start;
  }
  return start;
}

// Seeded Fisher-Yates over line slots. Hand-rolled (not std::shuffle)
// so the permutation is identical on every platform.
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace

Prompt build_prompt(const HistoryWindow& window, const ForecastQuery& query,
                    const Dictionary& entities, const Dictionary& relations,
                    PromptStyle style, const PromptOptions& opts) {
  if (window.empty()) {
    throw EmptyHistoryError("cannot build a prompt from an empty history window");
  }
  if (query.direction != QueryDirection::tail_prediction) {
    throw ConfigError("build_prompt expects a canonicalized (tail-form) query");
  }
  if (opts.shuffle_seed && opts.include_time) {
    throw ConfigError("shuffled prompts require include_time=false");
  }

  const std::size_t start = label_cap_start(window);
  const std::size_t line_count = window.facts.size() - start;

  std::vector<std::size_t> order(line_count);
  for (std::size_t i = 0; i < line_count; ++i) order[i] = start + i;
  if (opts.shuffle_seed) {
    const std::vector<std::size_t> perm = shuffled_order(line_count, *opts.shuffle_seed);
    for (std::size_t i = 0; i < line_count; ++i) order[i] = start + perm[i];
  }

  Prompt prompt;
  prompt.query = query;
  prompt.style = style;

  std::string& text = prompt.text;
  for (const std::size_t idx : order) {
    const Quadruple& fact = window.facts[idx].fact;
    const int label = prompt.labels.assign(fact.object);
    if (opts.include_time) {
      text += std::to_string(fact.timestamp);
      text += ": ";
    }
    text += '[';
    text += entity_text(fact.subject, entities, style);
    text += ", ";
    text += relation_text(fact.relation, relations, style);
    text += ", ";
    text += std::to_string(label);
    text += ". ";
    text += entity_text(fact.object, entities, style);
    text += "]\n";
  }

  if (opts.include_time) {
    text += std::to_string(query.timestamp);
    text += ": ";
  }
  text += '[';
  text += entity_text(query.known_entity, entities, style);
  text += ", ";
  text += relation_text(query.relation, relations, style);
  text += ',';
  return prompt;
}

ChatMessages build_chat_messages(const Prompt& prompt) {
  static const std::string kSystemInstruction =
      "You must be able to correctly predict the next {object_label} from a given text "
      "consisting of multiple quadruplets in the form of \"{time}:[{subject}, "
      "{relation}, {object_label}. {object}]\" and the query in the form of "
      "\"{time}:[{subject}, {relation},\" in the end.\n\n"
      "You must generate only the single number for {object_label} without any "
      "explanation.";
  return ChatMessages{kSystemInstruction, prompt.text};
}

std::string prompt_fingerprint(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

}  // namespace tkgf
