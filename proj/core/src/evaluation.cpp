#include "tkgf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "tkgf/errors.hpp"

namespace tkgf {

namespace {

struct QueryKey {
  EntityId entity;
  RelationId relation;
  Timestamp timestamp;

  friend bool operator==(const QueryKey&, const QueryKey&) = default;
};

struct QueryKeyHash {
  std::size_t operator()(const QueryKey& key) const {
    std::uint64_t h = (static_cast<std::uint64_t>(key.entity) << 32) | key.relation;
    h ^= static_cast<std::uint64_t>(key.timestamp) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

void collate_direction(std::span<const Quadruple> facts, QueryDirection direction,
                       std::vector<ForecastQuery>& out) {
  std::unordered_map<QueryKey, std::size_t, QueryKeyHash> groups;
  for (const Quadruple& fact : facts) {
    const bool tail = direction == QueryDirection::tail_prediction;
    const EntityId known = tail ? fact.subject : fact.object;
    const EntityId answer = tail ? fact.object : fact.subject;
    const auto [it, inserted] =
        groups.try_emplace(QueryKey{known, fact.relation, fact.timestamp}, out.size());
    if (inserted) {
      out.push_back(ForecastQuery{known, fact.relation, direction, fact.timestamp, {}});
    }
    std::vector<EntityId>& gold = out[it->second].gold;
    if (std::find(gold.begin(), gold.end(), answer) == gold.end()) {
      gold.push_back(answer);
    }
  }
}

}  // namespace

std::vector<ForecastQuery> collate(std::span<const Quadruple> test_facts,
                                   EvalDirections directions) {
  std::vector<ForecastQuery> queries;
  if (directions != EvalDirections::head_only) {
    collate_direction(test_facts, QueryDirection::tail_prediction, queries);
  }
  if (directions != EvalDirections::tail_only) {
    collate_direction(test_facts, QueryDirection::head_prediction, queries);
  }
  std::stable_sort(queries.begin(), queries.end(),
                   [](const ForecastQuery& a, const ForecastQuery& b) {
                     return a.timestamp < b.timestamp;
                   });
  return queries;
}

int rank_of(EntityId gold, const RankedPrediction& prediction,
            std::span<const EntityId> other_valid, RankFilter filter, int fallback) {
  if (prediction.no_prediction) return fallback;
  int filtered_position = 0;
  for (std::size_t i = 0; i < prediction.ranking.size(); ++i) {
    const EntityId entity = prediction.ranking[i].first;
    if (entity == gold) {
      return filter == RankFilter::raw ? static_cast<int>(i) + 1 : filtered_position + 1;
    }
    const bool is_other_valid =
        std::find(other_valid.begin(), other_valid.end(), entity) != other_valid.end();
    if (filter == RankFilter::raw || !is_other_valid) ++filtered_position;
  }
  return fallback;
}

namespace {

struct TimestampGroup {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<TimestampGroup> group_by_timestamp(std::span<const ForecastQuery> queries) {
  std::vector<TimestampGroup> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= queries.size(); ++i) {
    if (i == queries.size() || queries[i].timestamp != queries[begin].timestamp) {
      groups.push_back({begin, i});
      begin = i;
    }
  }
  return groups;
}

// Predicted facts go back into history in raw orientation so that other
// queries can match them from either slot.
Quadruple to_raw_fact(const ForecastQuery& canonical, EntityId predicted,
                      std::uint32_t num_relations) {
  if (canonical.relation >= num_relations) {
    return Quadruple{predicted, canonical.relation - num_relations,
                     canonical.known_entity, canonical.timestamp};
  }
  return Quadruple{canonical.known_entity, canonical.relation, predicted,
                   canonical.timestamp};
}

constexpr std::size_t kLoggedTokens = 10;

class Runner {
 public:
  Runner(const TemporalKG& kg, std::span<const ForecastQuery> queries, Backend& backend,
         const EvalConfig& config)
      : kg_(kg), queries_(queries), backend_(backend), config_(config) {
    if (config.feedback_k < 1) throw ConfigError("feedback_k must be >= 1");
    if (config.fallback_rank < 1) throw ConfigError("fallback_rank must be >= 1");
    if (config.prompt_opts.shuffle_seed && config.prompt_opts.include_time) {
      throw ConfigError("shuffled prompts require include_time=false");
    }
    if (!std::is_sorted(queries.begin(), queries.end(),
                        [](const ForecastQuery& a, const ForecastQuery& b) {
                          return a.timestamp < b.timestamp;
                        })) {
      throw ConfigError("queries must be sorted by timestamp");
    }
  }

  EvalReport run() {
    EvalReport report;
    report.results.resize(queries_.size());
    rankings_.resize(queries_.size());

    const std::size_t kg_limit =
        config_.mode == EvalMode::multi_step ? kg_.background_end() : kNoFactLimit;

    for (const TimestampGroup& group : group_by_timestamp(queries_)) {
      process_group(group, kg_limit, report);
      if (config_.mode == EvalMode::multi_step) {
        for (std::size_t i = group.begin; i < group.end; ++i) {
          feed_back_predictions(i);
        }
      }
    }

    finalize(report);
    return report;
  }

 private:
  void process_group(const TimestampGroup& group, std::size_t kg_limit,
                     EvalReport& report) {
    const std::size_t conc =
        std::min<std::size_t>(std::max<std::size_t>(backend_.max_concurrency(), 1),
                              group.end - group.begin);
    if (conc <= 1) {
      for (std::size_t i = group.begin; i < group.end; ++i) {
        evaluate_query(i, kg_limit, report.results[i]);
      }
      return;
    }

    std::atomic<std::size_t> next{group.begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(conc);
    for (std::size_t w = 0; w < conc; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < group.end; i = next.fetch_add(1)) {
          try {
            evaluate_query(i, kg_limit, report.results[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
  }

  void evaluate_query(std::size_t index, std::size_t kg_limit, QueryResult& result) {
    const ForecastQuery& original = queries_[index];
    result.query = original;

    const ForecastQuery canonical = canonicalize(original, kg_.num_base_relations());
    const HistoryWindow window =
        retrieve_history(kg_, canonical, config_.strategy, extras_, kg_limit);

    RankedPrediction prediction;
    prediction.no_prediction = true;

    if (!window.empty()) {
      const Prompt prompt = build_prompt(window, canonical, kg_.entities(),
                                         kg_.relations(), config_.style,
                                         config_.prompt_opts);
      result.prompt_fingerprint = prompt_fingerprint(prompt.text);
      try {
        const BackendResponse response = backend_.generate({prompt, window});
        if (response.is_distribution()) {
          const auto& entries = response.distribution().entries;
          result.top_tokens.assign(
              entries.begin(),
              entries.begin() +
                  static_cast<std::ptrdiff_t>(std::min(entries.size(), kLoggedTokens)));
        } else {
          result.completion = response.completion();
        }
        prediction = decode(response, prompt.labels);
      } catch (const BackendUnavailable&) {
        prediction = RankedPrediction{{}, true};
      } catch (const CapabilityError&) {
        prediction = RankedPrediction{{}, true};
      } catch (const EmptyHistoryError&) {
        prediction = RankedPrediction{{}, true};
      }
    }

    result.no_prediction = prediction.no_prediction;
    if (!prediction.ranking.empty()) {
      result.predicted_top1 = prediction.ranking.front().first;
    }

    result.golds.reserve(original.gold.size());
    std::vector<EntityId> other_valid;
    for (const EntityId gold : original.gold) {
      other_valid.clear();
      for (const EntityId other : original.gold) {
        if (other != gold) other_valid.push_back(other);
      }
      const int raw = rank_of(gold, prediction, other_valid, RankFilter::raw,
                              config_.fallback_rank);
      const int filtered = rank_of(gold, prediction, other_valid,
                                   RankFilter::time_aware, config_.fallback_rank);
      result.golds.push_back({gold, raw, filtered});
    }

    rankings_[index] = std::move(prediction);
  }

  void feed_back_predictions(std::size_t index) {
    const RankedPrediction& prediction = rankings_[index];
    if (prediction.no_prediction) return;
    const ForecastQuery canonical =
        canonicalize(queries_[index], kg_.num_base_relations());
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(config_.feedback_k), prediction.ranking.size());
    for (std::size_t i = 0; i < k; ++i) {
      extras_.push_back(
          to_raw_fact(canonical, prediction.ranking[i].first, kg_.num_base_relations()));
    }
  }

  void finalize(EvalReport& report) const {
    std::uint64_t gold_total = 0;
    std::uint64_t raw_hits[3] = {0, 0, 0};
    std::uint64_t filtered_hits[3] = {0, 0, 0};
    const int ks[3] = {1, 3, 10};
    for (const QueryResult& result : report.results) {
      if (result.no_prediction) ++report.num_no_prediction;
      for (const GoldOutcome& outcome : result.golds) {
        ++gold_total;
        for (int i = 0; i < 3; ++i) {
          if (outcome.raw_rank <= ks[i]) ++raw_hits[i];
          if (outcome.filtered_rank <= ks[i]) ++filtered_hits[i];
        }
      }
    }
    report.num_queries = report.results.size();
    report.num_gold_facts = gold_total;
    if (gold_total > 0) {
      const double denom = static_cast<double>(gold_total);
      report.raw = {raw_hits[0] / denom, raw_hits[1] / denom, raw_hits[2] / denom};
      report.time_aware = {filtered_hits[0] / denom, filtered_hits[1] / denom,
                           filtered_hits[2] / denom};
    }
  }

  const TemporalKG& kg_;
  std::span<const ForecastQuery> queries_;
  Backend& backend_;
  const EvalConfig& config_;
  std::vector<Quadruple> extras_;
  std::vector<RankedPrediction> rankings_;
};

}  // namespace

EvalReport run_single_step(const TemporalKG& kg, std::span<const ForecastQuery> queries,
                           Backend& backend, const EvalConfig& config) {
  EvalConfig cfg = config;
  cfg.mode = EvalMode::single_step;
  return Runner(kg, queries, backend, cfg).run();
}

EvalReport run_multi_step(const TemporalKG& kg, std::span<const ForecastQuery> queries,
                          Backend& backend, const EvalConfig& config) {
  EvalConfig cfg = config;
  cfg.mode = EvalMode::multi_step;
  return Runner(kg, queries, backend, cfg).run();
}

}  // namespace tkgf
