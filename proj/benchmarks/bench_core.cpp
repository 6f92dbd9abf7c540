// Microbenchmarks for the hot paths of the evaluation loop: history
// retrieval, prompt rendering, and the end-to-end heuristic pipeline.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tkgf/backend.hpp"
#include "tkgf/evaluation.hpp"
#include "tkgf/history.hpp"
#include "tkgf/prompt.hpp"
#include "tkgf/temporal_kg.hpp"

namespace {

using namespace tkgf;

Dictionary numbered(std::uint32_t n, const char* prefix) {
  Dictionary d;
  for (std::uint32_t i = 0; i < n; ++i) d.add(prefix + std::to_string(i), i);
  d.finalize();
  return d;
}

TemporalKG synthetic_kg(std::size_t facts, std::uint32_t entities,
                        std::uint32_t relations, Timestamp max_t,
                        std::uint64_t seed = 12345) {
  std::mt19937_64 rng(seed);
  std::vector<Quadruple> all;
  all.reserve(facts);
  for (std::size_t i = 0; i < facts; ++i) {
    all.push_back({static_cast<EntityId>(rng() % entities),
                   static_cast<RelationId>(rng() % relations),
                   static_cast<EntityId>(rng() % entities),
                   static_cast<Timestamp>(rng() % static_cast<std::uint64_t>(max_t))});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Quadruple& a, const Quadruple& b) {
                     return a.timestamp < b.timestamp;
                   });
  const std::size_t train_end = facts * 6 / 10;
  const std::size_t valid_end = facts * 8 / 10;
  return TemporalKG::from_parts(
      numbered(entities, "E"), numbered(relations, "R"),
      {all.begin(), all.begin() + train_end},
      {all.begin() + train_end, all.begin() + valid_end},
      {all.begin() + valid_end, all.end()});
}

void BM_RetrieveHistory(benchmark::State& state) {
  const auto kg = synthetic_kg(static_cast<std::size_t>(state.range(0)), 2000, 50, 300);
  const HistoryStrategy strategy{
      state.range(1) ? HistoryScope::pair : HistoryScope::entity,
      HistoryDirection::unidirectional, 100};
  std::mt19937_64 rng(7);
  for (auto _ : state) {
    const ForecastQuery q{static_cast<EntityId>(rng() % 2000),
                          static_cast<RelationId>(rng() % 50),
                          QueryDirection::tail_prediction, 299, {0}};
    benchmark::DoNotOptimize(retrieve_history(kg, q, strategy));
  }
}
BENCHMARK(BM_RetrieveHistory)
    ->ArgsProduct({{100000, 500000}, {0, 1}})
    ->ArgNames({"facts", "pair"});

void BM_BuildPrompt(benchmark::State& state) {
  const auto entities = numbered(5000, "E");
  const auto relations = numbered(50, "R");
  HistoryWindow window;
  std::mt19937_64 rng(11);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    window.facts.push_back({{42, static_cast<RelationId>(rng() % 50),
                             static_cast<EntityId>(rng() % 5000),
                             static_cast<Timestamp>(i)}, false});
  }
  const ForecastQuery query{42, 3, QueryDirection::tail_prediction,
                            static_cast<Timestamp>(state.range(0) + 1), {0}};
  const PromptStyle style = state.range(1) ? PromptStyle::lexical : PromptStyle::index;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_prompt(window, query, entities, relations, style));
  }
}
BENCHMARK(BM_BuildPrompt)
    ->ArgsProduct({{10, 100}, {0, 1}})
    ->ArgNames({"window", "lexical"});

void BM_FrequencyEval(benchmark::State& state) {
  const auto kg = synthetic_kg(static_cast<std::size_t>(state.range(0)), 1000, 20, 200);
  const auto queries = collate(kg.test_facts(), EvalDirections::both);
  EvalConfig cfg;
  cfg.directions = EvalDirections::both;
  for (auto _ : state) {
    FrequencyBackend backend;
    benchmark::DoNotOptimize(run_single_step(kg, queries, backend, cfg));
  }
  state.counters["queries"] = static_cast<double>(queries.size());
}
BENCHMARK(BM_FrequencyEval)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
