#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tkgf/evaluation.hpp"
#include "tkgf/runspec.hpp"
#include "tkgf/temporal_kg.hpp"

namespace tkgf {

/// One JSON line per (query, gold) pair: query key, direction,
/// timestamp, gold, prompt fingerprint, logged top tokens, raw and
/// filtered rank, predicted top-1. Output depends only on the report,
/// so identical runs produce byte-identical logs.
void write_query_log(const EvalReport& report, std::ostream& out);

/// Summary JSON: resolved run configuration, hits table (raw and
/// time-aware at k = 1, 3, 10), counts, wall time.
std::string render_summary(const EvalReport& report, const RunSpec& spec,
                           double wall_time_seconds);

/// Dataset stats JSON: {entities, relations, train, valid, test,
/// num_timestamps, interval_raw_units, dataset}.
std::string render_stats(const DatasetStats& stats, const std::string& dataset_name);

struct MetricDelta {
  std::string metric;  // e.g. "time_aware.h1"
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

struct CompareResult {
  std::vector<MetricDelta> deltas;
  bool dataset_mismatch = false;
  std::string json_text;
};

/// Diffs two summary JSON files metric by metric. Throws SchemaError
/// when either file lacks the summary shape; differing dataset names
/// only set the mismatch flag.
CompareResult compare_summaries(const std::filesystem::path& summary_a,
                                const std::filesystem::path& summary_b);

}  // namespace tkgf
