#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"
#include "tkgf/history.hpp"

using namespace tkgf;

namespace {

std::vector<Quadruple> window_quads(const HistoryWindow& window) {
  std::vector<Quadruple> out;
  for (const WindowFact& wf : window.facts) out.push_back(wf.fact);
  return out;
}

// Superbowl-style micro graph: entity 0 = the event, relation 0 =
// champion, relation 1 = played-at.
TemporalKG superbowl_kg() {
  return test::make_kg(6, 2,
                       {
                           {0, 0, 1, 2000},  // (event, champion, team1)
                           {0, 0, 2, 2001},
                           {3, 1, 0, 2022},  // (player, played, event)
                           {2, 1, 4, 2021},  // unrelated to entity 0
                       },
                       {{0, 0, 4, 2022}}, {{0, 0, 5, 2023}});
}

}  // namespace

TEST_SUITE_BEGIN("history_retrieval");

TEST_CASE("canonicalize: head query rewrites through the inverse relation") {
  // (?, p=3, o=7, t) with |R|=10 becomes (s=7, p=13, ?, t).
  const ForecastQuery head{7, 3, QueryDirection::head_prediction, 11, {1}};
  const ForecastQuery canonical = canonicalize(head, 10);
  CHECK(canonical.known_entity == 7);
  CHECK(canonical.relation == 13);
  CHECK(canonical.direction == QueryDirection::tail_prediction);
  CHECK(canonical.timestamp == 11);
  CHECK(canonical.gold == std::vector<EntityId>{1});
}

TEST_CASE("canonicalize: tail queries pass through, idempotent on random queries") {
  const ForecastQuery tail{4, 2, QueryDirection::tail_prediction, 9, {0}};
  CHECK(canonicalize(tail, 10) == tail);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const ForecastQuery q{static_cast<EntityId>(rng() % 50),
                          static_cast<RelationId>(rng() % 10),
                          rng() % 2 ? QueryDirection::head_prediction
                                    : QueryDirection::tail_prediction,
                          static_cast<Timestamp>(rng() % 100),
                          {static_cast<EntityId>(rng() % 50)}};
    const ForecastQuery once = canonicalize(q, 10);
    CHECK(canonicalize(once, 10) == once);
  }
}

TEST_CASE("pair scope keeps only facts sharing the query relation") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery q{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  const HistoryWindow window =
      retrieve_history(kg, q, {HistoryScope::pair, HistoryDirection::unidirectional, 100});
  CHECK(window_quads(window) == std::vector<Quadruple>{
                                    {0, 0, 1, 2000}, {0, 0, 2, 2001}, {0, 0, 4, 2022}});
}

TEST_CASE("bidirectional entity scope rewrites object-position matches") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery q{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  const HistoryWindow window = retrieve_history(
      kg, q, {HistoryScope::entity, HistoryDirection::bidirectional, 100});
  // (3, played, 0, 2022) surfaces as (0, played^-1, 3, 2022).
  const std::vector<Quadruple> quads = window_quads(window);
  CHECK(std::find(quads.begin(), quads.end(), Quadruple{0, 1 + 2, 3, 2022}) != quads.end());
  for (const Quadruple& f : quads) CHECK(f.subject == 0);
}

TEST_CASE("truncation keeps the most recent facts") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery q{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  const HistoryWindow window =
      retrieve_history(kg, q, {HistoryScope::pair, HistoryDirection::unidirectional, 1});
  REQUIRE(window.size() == 1);
  CHECK(window.facts[0].fact == Quadruple{0, 0, 4, 2022});
}

TEST_CASE("head queries match the object slot under unidirectional scope") {
  const TemporalKG kg = superbowl_kg();
  // Who played at entity 0? Known entity sits in the object slot.
  const ForecastQuery head{0, 1, QueryDirection::head_prediction, 2023, {3}};
  const ForecastQuery canonical = canonicalize(head, kg.num_base_relations());
  const HistoryWindow window = retrieve_history(
      kg, canonical, {HistoryScope::pair, HistoryDirection::unidirectional, 100});
  CHECK(window_quads(window) == std::vector<Quadruple>{{0, 1 + 2, 3, 2022}});
  // Subject-position champion facts stay out of a unidirectional head window.
  const HistoryWindow entity_window = retrieve_history(
      kg, canonical, {HistoryScope::entity, HistoryDirection::unidirectional, 100});
  for (const WindowFact& wf : entity_window.facts) {
    CHECK(wf.fact.relation >= kg.num_base_relations());
  }
}

TEST_CASE("extras are flagged, sorted after graph facts at equal timestamps") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery q{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  const std::vector<Quadruple> extras = {{0, 0, 3, 2022}, {0, 0, 1, 2001}};
  const HistoryWindow window = retrieve_history(
      kg, q, {HistoryScope::pair, HistoryDirection::unidirectional, 100}, extras);
  const std::vector<Quadruple> quads = window_quads(window);
  REQUIRE(quads.size() == 5);
  // 2001: graph fact first, predicted second.
  CHECK(quads[1] == Quadruple{0, 0, 2, 2001});
  CHECK(quads[2] == Quadruple{0, 0, 1, 2001});
  CHECK(window.facts[2].predicted);
  // 2022: graph fact before the predicted one.
  CHECK(quads[3] == Quadruple{0, 0, 4, 2022});
  CHECK(quads[4] == Quadruple{0, 0, 3, 2022});
  CHECK(window.facts[4].predicted);
}

TEST_CASE("kg_fact_limit hides facts at and beyond the boundary") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery q{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  const HistoryStrategy strategy{HistoryScope::pair, HistoryDirection::unidirectional, 100};
  CHECK(retrieve_history(kg, q, strategy).size() == 3);
  // Train + valid background keeps the valid-split 2022 fact visible.
  CHECK(retrieve_history(kg, q, strategy, {}, kg.background_end()).size() == 3);
  // A train-only horizon hides it.
  const std::size_t train_only = kg.background_end() - kg.valid_facts().size();
  CHECK(retrieve_history(kg, q, strategy, {}, train_only).size() == 2);
}

TEST_CASE("property: windows match the linear-scan oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const TemporalKG kg = test::random_kg({.entities = 12, .relations = 3, .facts = 300,
                                           .max_timestamp = 20,
                                           .seed = 100 + static_cast<std::uint64_t>(trial)});
    std::vector<Quadruple> extras =
        test::random_facts(rng, 12, 3, rng() % 20, 20);
    std::stable_sort(extras.begin(), extras.end(),
                     [](const Quadruple& a, const Quadruple& b) {
                       return a.timestamp < b.timestamp;
                     });
    for (int qi = 0; qi < 10; ++qi) {
      const bool head = rng() % 2 == 0;
      ForecastQuery q{static_cast<EntityId>(rng() % 12),
                      static_cast<RelationId>(rng() % 3),
                      head ? QueryDirection::head_prediction
                           : QueryDirection::tail_prediction,
                      static_cast<Timestamp>(rng() % 22), {0}};
      const ForecastQuery canonical = canonicalize(q, kg.num_base_relations());
      const HistoryStrategy strategy{
          rng() % 2 ? HistoryScope::entity : HistoryScope::pair,
          rng() % 2 ? HistoryDirection::unidirectional : HistoryDirection::bidirectional,
          1 + rng() % 12};
      const std::size_t limit = rng() % 2 ? kNoFactLimit : kg.background_end();

      const HistoryWindow got = retrieve_history(kg, canonical, strategy, extras, limit);
      const std::vector<WindowFact> expected = test::oracle_history(
          kg.facts(), extras, canonical, strategy, kg.num_base_relations(), limit);
      CHECK(got.facts == expected);
    }
  }
}

TEST_CASE("property: subset relations and timestamp bound") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const TemporalKG kg = test::random_kg({.entities = 10, .relations = 3, .facts = 250,
                                           .max_timestamp = 15,
                                           .seed = 500 + static_cast<std::uint64_t>(trial)});
    const ForecastQuery q{static_cast<EntityId>(rng() % 10),
                          static_cast<RelationId>(rng() % 3),
                          QueryDirection::tail_prediction,
                          static_cast<Timestamp>(1 + rng() % 16),
                          {0}};
    // No truncation so the subset relations hold.
    const std::size_t len = 10000;
    const auto window = [&](HistoryScope scope, HistoryDirection dir) {
      return retrieve_history(kg, q, {scope, dir, len});
    };
    const auto as_multiset = [](const HistoryWindow& w) {
      std::multiset<std::string> keys;
      for (const WindowFact& wf : w.facts) {
        keys.insert(std::to_string(wf.fact.subject) + "," +
                    std::to_string(wf.fact.relation) + "," +
                    std::to_string(wf.fact.object) + "," +
                    std::to_string(wf.fact.timestamp));
      }
      return keys;
    };

    const auto uni_entity = window(HistoryScope::entity, HistoryDirection::unidirectional);
    const auto bi_entity = window(HistoryScope::entity, HistoryDirection::bidirectional);
    const auto uni_pair = window(HistoryScope::pair, HistoryDirection::unidirectional);
    const auto bi_pair = window(HistoryScope::pair, HistoryDirection::bidirectional);

    const auto includes = [&](const HistoryWindow& big, const HistoryWindow& small) {
      const auto big_keys = as_multiset(big);
      const auto small_keys = as_multiset(small);
      return std::includes(big_keys.begin(), big_keys.end(), small_keys.begin(),
                           small_keys.end());
    };
    CHECK(includes(bi_entity, uni_entity));  // uni subset of bi
    CHECK(includes(bi_pair, uni_pair));
    CHECK(includes(uni_entity, uni_pair));  // pair subset of entity
    CHECK(includes(bi_entity, bi_pair));

    for (const auto& w : {uni_entity, bi_entity, uni_pair, bi_pair}) {
      for (const WindowFact& wf : w.facts) {
        CHECK(wf.fact.timestamp < q.timestamp);
        CHECK(wf.fact.subject == q.known_entity);
      }
    }

    // Determinism.
    CHECK(window(HistoryScope::entity, HistoryDirection::bidirectional).facts ==
          bi_entity.facts);
  }
}

TEST_CASE("invalid inputs rejected") {
  const TemporalKG kg = superbowl_kg();
  const ForecastQuery head{0, 0, QueryDirection::head_prediction, 2023, {5}};
  CHECK_THROWS_AS(
      retrieve_history(kg, head, {HistoryScope::entity, HistoryDirection::unidirectional, 5}),
      ConfigError);
  const ForecastQuery tail{0, 0, QueryDirection::tail_prediction, 2023, {5}};
  CHECK_THROWS_AS(
      retrieve_history(kg, tail, {HistoryScope::entity, HistoryDirection::unidirectional, 0}),
      ConfigError);
}

TEST_SUITE_END();
