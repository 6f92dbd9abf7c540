#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tkgf/temporal_kg.hpp"
#include "tkgf/types.hpp"

namespace tkgf {

enum class QueryDirection { tail_prediction, head_prediction };

/// One collated prediction task. `gold` holds every entity that is a
/// correct answer for this (known entity, relation, timestamp) key.
struct ForecastQuery {
  EntityId known_entity = 0;
  RelationId relation = 0;
  QueryDirection direction = QueryDirection::tail_prediction;
  Timestamp timestamp = 0;
  std::vector<EntityId> gold;

  friend bool operator==(const ForecastQuery&, const ForecastQuery&) = default;
};

/// Whether history keys on the query entity alone or on (entity, relation).
enum class HistoryScope { entity, pair };

/// Whether the key may match only in the query's own slot or in any slot.
enum class HistoryDirection { unidirectional, bidirectional };

struct HistoryStrategy {
  HistoryScope scope = HistoryScope::entity;
  HistoryDirection direction = HistoryDirection::unidirectional;
  std::size_t length = 100;  // max facts kept, most recent wins
};

/// A history fact as it will be shown in the prompt: the query's known
/// entity always sits in the subject slot, object-position matches have
/// been rewritten through the inverse relation. `predicted` marks
/// facts that came from the model's own earlier predictions.
struct WindowFact {
  Quadruple fact;
  bool predicted = false;

  friend bool operator==(const WindowFact&, const WindowFact&) = default;
};

struct HistoryWindow {
  std::vector<WindowFact> facts;  // ascending by (timestamp, source order)

  bool empty() const { return facts.empty(); }
  std::size_t size() const { return facts.size(); }
};

/// Rewrites head-prediction queries into tail-prediction form through the
/// inverse relation so all downstream code predicts the object slot.
/// Tail queries pass through unchanged; the rewrite is idempotent.
ForecastQuery canonicalize(const ForecastQuery& query, std::uint32_t num_relations);

constexpr std::size_t kNoFactLimit = static_cast<std::size_t>(-1);

/// Selects the history window for a canonicalized query.
///
/// Matching follows the strategy axes: Entity keys on the query entity,
/// Pair additionally requires the query relation; Unidirectional accepts
/// only the slot the entity occupies in the query, Bidirectional accepts
/// both slots and rewrites object-position matches as
/// (object, inverse relation, subject). `extra` facts (multi-step
/// predictions, in raw orientation) are matched with the same rules and
/// flagged as predicted; at equal timestamps they sort after graph facts.
/// Only facts strictly before query.timestamp are eligible, and graph
/// facts at positions >= kg_fact_limit are invisible (the multi-step
/// loop uses this to hide the test split). The result is ascending and
/// truncated to the most recent strategy.length facts.
HistoryWindow retrieve_history(const TemporalKG& kg, const ForecastQuery& query,
                               const HistoryStrategy& strategy,
                               std::span<const Quadruple> extra = {},
                               std::size_t kg_fact_limit = kNoFactLimit);

}  // namespace tkgf
