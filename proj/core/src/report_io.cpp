#include "tkgf/report_io.hpp"

#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "tkgf/errors.hpp"

namespace tkgf {

namespace {

using nlohmann::json;

json tokens_to_json(const std::vector<TokenEntry>& tokens) {
  json out = json::array();
  for (const TokenEntry& t : tokens) out.push_back(json::array({t.token, t.logprob}));
  return out;
}

json hits_to_json(const HitsTable& hits) {
  return json{{"h1", hits.at1}, {"h3", hits.at3}, {"h10", hits.at10}};
}

json config_to_json(const RunSpec& spec) {
  json backend = {
      {"kind", to_string(spec.backend.kind)},
      {"endpoint", spec.backend.http.endpoint},
      {"model", spec.backend.http.model},
      {"auth_env", spec.backend.http.auth_env},
      {"timeout_ms", spec.backend.http.timeout_ms},
      {"max_inflight", spec.backend.http.max_inflight},
      {"retries", spec.backend.http.retries},
      {"mock_script", spec.backend.mock_script.string()},
  };
  json config = {
      {"dataset_dir", spec.dataset_dir.string()},
      {"mode", to_string(spec.eval.mode)},
      {"feedback_k", spec.eval.feedback_k},
      {"history",
       {{"scope", to_string(spec.eval.strategy.scope)},
        {"direction", to_string(spec.eval.strategy.direction)},
        {"length", spec.eval.strategy.length}}},
      {"style", to_string(spec.eval.style)},
      {"include_time", spec.eval.prompt_opts.include_time},
      {"shuffle_seed", spec.eval.prompt_opts.shuffle_seed
                           ? json(*spec.eval.prompt_opts.shuffle_seed)
                           : json(nullptr)},
      {"directions", to_string(spec.eval.directions)},
      {"fallback_rank", spec.eval.fallback_rank},
      {"seed", spec.seed},
      {"backend", std::move(backend)},
  };
  return config;
}

json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw SchemaError(file.string() + ": expected a JSON object");
  }
  return doc;
}

double hits_field(const json& summary, const char* table, const char* key,
                  const std::filesystem::path& origin) {
  if (!summary.contains("hits") || !summary["hits"].contains(table) ||
      !summary["hits"][table].contains(key) ||
      !summary["hits"][table][key].is_number()) {
    throw SchemaError(origin.string() + ": summary lacks hits." + table + "." + key);
  }
  return summary["hits"][table][key].get<double>();
}

}  // namespace

void write_query_log(const EvalReport& report, std::ostream& out) {
  for (const QueryResult& result : report.results) {
    const char* direction =
        result.query.direction == QueryDirection::tail_prediction ? "tail" : "head";
    for (const GoldOutcome& outcome : result.golds) {
      json line = {
          {"query",
           {{"entity", result.query.known_entity}, {"relation", result.query.relation}}},
          {"direction", direction},
          {"timestamp", result.query.timestamp},
          {"gold", outcome.gold},
          {"prompt_fingerprint", result.prompt_fingerprint},
          {"top_tokens", tokens_to_json(result.top_tokens)},
          {"raw_rank", outcome.raw_rank},
          {"filtered_rank", outcome.filtered_rank},
          {"predicted_top1",
           result.predicted_top1 ? json(*result.predicted_top1) : json(nullptr)},
      };
      if (result.completion) line["completion"] = *result.completion;
      out << line.dump() << '\n';
    }
  }
}

std::string render_summary(const EvalReport& report, const RunSpec& spec,
                           double wall_time_seconds) {
  const json summary = {
      {"dataset", spec.dataset_name},
      {"backend", to_string(spec.backend.kind)},
      {"config", config_to_json(spec)},
      {"hits",
       {{"raw", hits_to_json(report.raw)}, {"time_aware", hits_to_json(report.time_aware)}}},
      {"counts",
       {{"queries", report.num_queries},
        {"gold_facts", report.num_gold_facts},
        {"no_prediction", report.num_no_prediction}}},
      {"wall_time_seconds", wall_time_seconds},
  };
  return summary.dump(2) + "\n";
}

std::string render_stats(const DatasetStats& stats, const std::string& dataset_name) {
  const json doc = {
      {"dataset", dataset_name},
      {"entities", stats.entities},
      {"relations", stats.relations},
      {"train", stats.train},
      {"valid", stats.valid},
      {"test", stats.test},
      {"num_timestamps", stats.num_timestamps},
      {"interval_raw_units", stats.interval_raw_units},
  };
  return doc.dump(2) + "\n";
}

CompareResult compare_summaries(const std::filesystem::path& summary_a,
                                const std::filesystem::path& summary_b) {
  const json a = load_json(summary_a);
  const json b = load_json(summary_b);

  CompareResult result;
  const std::string dataset_a = a.value("dataset", std::string());
  const std::string dataset_b = b.value("dataset", std::string());
  result.dataset_mismatch = dataset_a != dataset_b;

  json deltas = {{"raw", json::object()}, {"time_aware", json::object()}};
  for (const char* table : {"raw", "time_aware"}) {
    for (const char* key : {"h1", "h3", "h10"}) {
      const double va = hits_field(a, table, key, summary_a);
      const double vb = hits_field(b, table, key, summary_b);
      result.deltas.push_back(
          {std::string(table) + "." + key, va, vb, vb - va});
      deltas[table][key] = vb - va;
    }
  }

  const json doc = {
      {"dataset_a", dataset_a},
      {"dataset_b", dataset_b},
      {"dataset_mismatch", result.dataset_mismatch},
      {"hits_a", a["hits"]},
      {"hits_b", b["hits"]},
      {"deltas", deltas},
  };
  result.json_text = doc.dump(2) + "\n";
  return result;
}

}  // namespace tkgf
