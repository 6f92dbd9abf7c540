#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tkgf/backend.hpp"
#include "tkgf/decode.hpp"
#include "tkgf/history.hpp"
#include "tkgf/prompt.hpp"
#include "tkgf/temporal_kg.hpp"

namespace tkgf {

enum class EvalMode { single_step, multi_step };
enum class EvalDirections { tail_only, head_only, both };
enum class RankFilter { raw, time_aware };

struct EvalConfig {
  EvalMode mode = EvalMode::single_step;
  int feedback_k = 1;  // predictions fed back per query in multi-step
  HistoryStrategy strategy;
  PromptStyle style = PromptStyle::index;
  PromptOptions prompt_opts;
  EvalDirections directions = EvalDirections::both;
  int fallback_rank = 100;  // rank assigned when the gold label never decodes
};

struct GoldOutcome {
  EntityId gold = 0;
  int raw_rank = 0;
  int filtered_rank = 0;
};

struct QueryResult {
  ForecastQuery query;  // as collated, before canonicalization
  bool no_prediction = false;
  std::optional<EntityId> predicted_top1;
  std::string prompt_fingerprint;
  std::vector<TokenEntry> top_tokens;     // head of the distribution, for logs
  std::optional<std::string> completion;  // chat backends only
  std::vector<GoldOutcome> golds;
};

struct HitsTable {
  double at1 = 0.0;
  double at3 = 0.0;
  double at10 = 0.0;
};

struct EvalReport {
  HitsTable raw;
  HitsTable time_aware;
  std::uint64_t num_queries = 0;
  std::uint64_t num_gold_facts = 0;  // (query, gold) pairs, the metric denominator
  std::uint64_t num_no_prediction = 0;
  std::vector<QueryResult> results;
};

/// Groups test facts into one query per (known entity, relation,
/// timestamp) key so repeated inference is avoided: tail queries gather
/// all objects of (s, p, t) as gold, head queries gather all subjects
/// of (o, p, t). Output is sorted by timestamp (tail queries before
/// head queries inside one timestamp, first-occurrence order within).
std::vector<ForecastQuery> collate(std::span<const Quadruple> test_facts,
                                   EvalDirections directions);

/// 1-based rank of `gold` inside the prediction. The time-aware filter
/// removes `other_valid` entities (the query's other correct answers)
/// ranked above gold before counting. Absent gold or a no-prediction
/// response yields `fallback`.
int rank_of(EntityId gold, const RankedPrediction& prediction,
            std::span<const EntityId> other_valid, RankFilter filter, int fallback);

/// Single-step protocol: test queries are answered timestamp by
/// timestamp, and each timestamp's gold facts become visible history
/// for all later timestamps (train and valid facts are always visible).
EvalReport run_single_step(const TemporalKG& kg, std::span<const ForecastQuery> queries,
                           Backend& backend, const EvalConfig& config);

/// Multi-step protocol: gold test facts stay hidden; after each
/// timestamp the top-feedback_k predicted objects of every query are
/// appended to history as predicted facts and persist for the rest of
/// the run. Queries that produced no prediction contribute nothing.
EvalReport run_multi_step(const TemporalKG& kg, std::span<const ForecastQuery> queries,
                          Backend& backend, const EvalConfig& config);

}  // namespace tkgf
