#include "tkgf/history.hpp"

#include <algorithm>

#include "tkgf/errors.hpp"

namespace tkgf {

ForecastQuery canonicalize(const ForecastQuery& query, std::uint32_t num_relations) {
  if (query.direction == QueryDirection::tail_prediction) return query;
  ForecastQuery out = query;
  out.relation = inverse_relation(query.relation, num_relations);
  out.direction = QueryDirection::tail_prediction;
  return out;
}

namespace {

Quadruple rewrite_object_match(const Quadruple& fact, std::uint32_t num_relations) {
  return Quadruple{fact.object, fact.relation + num_relations, fact.subject,
                   fact.timestamp};
}

std::span<const std::uint32_t> clip_positions(std::span<const std::uint32_t> postings,
                                              std::size_t fact_limit) {
  if (fact_limit == kNoFactLimit) return postings;
  // Positions ascend, so the limit is a prefix boundary.
  const auto end = std::lower_bound(postings.begin(), postings.end(), fact_limit);
  return postings.subspan(0, static_cast<std::size_t>(end - postings.begin()));
}

}  // namespace

HistoryWindow retrieve_history(const TemporalKG& kg, const ForecastQuery& query,
                               const HistoryStrategy& strategy,
                               std::span<const Quadruple> extra,
                               std::size_t kg_fact_limit) {
  if (query.direction != QueryDirection::tail_prediction) {
    throw ConfigError("retrieve_history expects a canonicalized (tail-form) query");
  }
  if (strategy.length == 0) {
    throw ConfigError("history length must be >= 1");
  }

  const std::uint32_t num_rel = kg.num_base_relations();
  const EntityId entity = query.known_entity;
  const bool query_inverse = query.relation >= num_rel;
  const RelationId base_relation =
      query_inverse ? query.relation - num_rel : query.relation;
  const std::optional<RelationId> pair_filter =
      strategy.scope == HistoryScope::pair ? std::optional<RelationId>(base_relation)
                                           : std::nullopt;

  const bool bidirectional = strategy.direction == HistoryDirection::bidirectional;
  const bool search_subject = bidirectional || !query_inverse;
  const bool search_object = bidirectional || query_inverse;

  std::span<const std::uint32_t> subj_positions, obj_positions;
  if (search_subject) {
    subj_positions = clip_positions(
        facts_before(kg, query.timestamp, SlotPosition::subject, entity, pair_filter),
        kg_fact_limit);
  }
  if (search_object) {
    obj_positions = clip_positions(
        facts_before(kg, query.timestamp, SlotPosition::object, entity, pair_filter),
        kg_fact_limit);
  }

  // Merge the two posting streams by position; a self-loop sits in both
  // and yields its subject reading first.
  std::vector<WindowFact> graph_matches;
  graph_matches.reserve(subj_positions.size() + obj_positions.size());
  std::size_t i = 0, j = 0;
  while (i < subj_positions.size() || j < obj_positions.size()) {
    const bool take_subject =
        j == obj_positions.size() ||
        (i < subj_positions.size() && subj_positions[i] <= obj_positions[j]);
    if (take_subject) {
      graph_matches.push_back({kg.fact(subj_positions[i]), false});
      ++i;
    } else {
      graph_matches.push_back({rewrite_object_match(kg.fact(obj_positions[j]), num_rel), false});
      ++j;
    }
  }

  std::vector<WindowFact> extra_matches;
  for (const Quadruple& fact : extra) {
    if (fact.timestamp >= query.timestamp) continue;
    const bool relation_ok = !pair_filter || fact.relation == *pair_filter;
    if (!relation_ok) continue;
    if (search_subject && fact.subject == entity) {
      extra_matches.push_back({fact, true});
    }
    if (search_object && fact.object == entity) {
      extra_matches.push_back({rewrite_object_match(fact, num_rel), true});
    }
  }
  std::stable_sort(extra_matches.begin(), extra_matches.end(),
                   [](const WindowFact& a, const WindowFact& b) {
                     return a.fact.timestamp < b.fact.timestamp;
                   });

  // Graph facts come first inside a timestamp, then predicted ones in
  // insertion order.
  HistoryWindow window;
  window.facts.reserve(graph_matches.size() + extra_matches.size());
  std::size_t g = 0, e = 0;
  while (g < graph_matches.size() || e < extra_matches.size()) {
    const bool take_graph =
        e == extra_matches.size() ||
        (g < graph_matches.size() &&
         graph_matches[g].fact.timestamp <= extra_matches[e].fact.timestamp);
    window.facts.push_back(take_graph ? graph_matches[g++] : extra_matches[e++]);
  }

  if (window.facts.size() > strategy.length) {
    window.facts.erase(window.facts.begin(),
                       window.facts.end() - static_cast<std::ptrdiff_t>(strategy.length));
  }
  return window;
}

}  // namespace tkgf
