// tkgf: temporal knowledge-graph forecasting harness.
//
// Subcommands:
//   stats    print dataset statistics as JSON
//   run      evaluate a backend over a dataset's test split
//   compare  diff two run summaries metric by metric
//
// `run` resolves its configuration as CLI flags > config file > defaults
// and can expand into a sweep over history length / scope / direction /
// style combinations.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tkgf/errors.hpp"
#include "tkgf/report_io.hpp"
#include "tkgf/runspec.hpp"

namespace fs = std::filesystem;

namespace {

struct RunCli {
  std::string dataset;
  std::string config_file;
  std::string backend;
  std::string endpoint;
  std::string model;
  std::string auth_env;
  int timeout_ms = 0;
  int max_inflight = 0;
  int retries = -1;
  std::string mock_script;
  int history = 0;
  std::string scope;
  std::string hist_direction;
  std::string style;
  std::string mode;
  int feedback_k = 0;
  std::string directions;
  bool no_time = false;
  std::int64_t shuffle_seed = 0;
  int fallback_rank = 0;
  std::string out;
  std::int64_t seed = 0;

  std::vector<int> sweep_history;
  std::vector<std::string> sweep_scope;
  std::vector<std::string> sweep_hist_direction;
  std::vector<std::string> sweep_style;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tkgf::Error("cannot write " + path.string());
  out << content;
}

std::string run_tag(const tkgf::RunSpec& spec) {
  std::ostringstream tag;
  tag << "h" << spec.eval.strategy.length << "_" << to_string(spec.eval.strategy.scope)
      << "_" << to_string(spec.eval.strategy.direction) << "_"
      << to_string(spec.eval.style);
  return tag.str();
}

void execute_run(tkgf::RunSpec spec, const tkgf::TemporalKG& kg) {
  if (spec.eval.prompt_opts.shuffle_seed && spec.eval.prompt_opts.include_time) {
    throw tkgf::ConfigError("--shuffle-seed requires --no-time");
  }

  const std::unique_ptr<tkgf::Backend> backend = tkgf::make_backend(spec.backend);
  const std::vector<tkgf::ForecastQuery> queries =
      tkgf::collate(kg.test_facts(), spec.eval.directions);

  const auto started = std::chrono::steady_clock::now();
  const tkgf::EvalReport report =
      spec.eval.mode == tkgf::EvalMode::single_step
          ? tkgf::run_single_step(kg, queries, *backend, spec.eval)
          : tkgf::run_multi_step(kg, queries, *backend, spec.eval);
  const double wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  fs::create_directories(spec.out_dir);
  {
    std::ofstream log(spec.out_dir / "results.jsonl", std::ios::binary);
    if (!log) throw tkgf::Error("cannot write " + (spec.out_dir / "results.jsonl").string());
    tkgf::write_query_log(report, log);
  }
  write_file(spec.out_dir / "summary.json",
             tkgf::render_summary(report, spec, wall_seconds));

  std::printf("%s  %s  mode=%s  gold=%llu  no_pred=%llu\n", spec.dataset_name.c_str(),
              backend->name().c_str(), to_string(spec.eval.mode).c_str(),
              static_cast<unsigned long long>(report.num_gold_facts),
              static_cast<unsigned long long>(report.num_no_prediction));
  std::printf("  raw         hits@1/3/10 = %.4f / %.4f / %.4f\n", report.raw.at1,
              report.raw.at3, report.raw.at10);
  std::printf("  time-aware  hits@1/3/10 = %.4f / %.4f / %.4f\n", report.time_aware.at1,
              report.time_aware.at3, report.time_aware.at10);
  std::printf("  wrote %s\n", (spec.out_dir / "summary.json").string().c_str());
}

int cmd_run(const RunCli& cli, const CLI::App& app) {
  tkgf::RunSpec spec;

  if (!cli.config_file.empty()) tkgf::apply_config_file(spec, cli.config_file);

  // CLI flags override the config file; only flags the user actually
  // passed are applied.
  const auto passed = [&](const std::string& flag) { return app.count(flag) > 0; };
  if (passed("--dataset")) tkgf::apply_config_entry(spec, "dataset", cli.dataset);
  if (passed("--backend")) tkgf::apply_config_entry(spec, "backend.kind", cli.backend);
  if (passed("--endpoint")) tkgf::apply_config_entry(spec, "backend.endpoint", cli.endpoint);
  if (passed("--model")) tkgf::apply_config_entry(spec, "backend.model", cli.model);
  if (passed("--auth-env")) tkgf::apply_config_entry(spec, "backend.auth_env", cli.auth_env);
  if (passed("--timeout-ms")) {
    tkgf::apply_config_entry(spec, "backend.timeout_ms", std::to_string(cli.timeout_ms));
  }
  if (passed("--max-inflight")) {
    tkgf::apply_config_entry(spec, "backend.max_inflight", std::to_string(cli.max_inflight));
  }
  if (passed("--retries")) {
    tkgf::apply_config_entry(spec, "backend.retries", std::to_string(cli.retries));
  }
  if (passed("--mock-script")) tkgf::apply_config_entry(spec, "mock_script", cli.mock_script);
  if (passed("--history")) {
    tkgf::apply_config_entry(spec, "history", std::to_string(cli.history));
  }
  if (passed("--scope")) tkgf::apply_config_entry(spec, "scope", cli.scope);
  if (passed("--hist-direction")) {
    tkgf::apply_config_entry(spec, "hist_direction", cli.hist_direction);
  }
  if (passed("--style")) tkgf::apply_config_entry(spec, "style", cli.style);
  if (passed("--mode")) tkgf::apply_config_entry(spec, "mode", cli.mode);
  if (passed("--feedback-k")) {
    tkgf::apply_config_entry(spec, "feedback_k", std::to_string(cli.feedback_k));
  }
  if (passed("--directions")) tkgf::apply_config_entry(spec, "directions", cli.directions);
  if (passed("--no-time")) tkgf::apply_config_entry(spec, "no_time", "true");
  if (passed("--shuffle-seed")) {
    tkgf::apply_config_entry(spec, "shuffle_seed", std::to_string(cli.shuffle_seed));
  }
  if (passed("--fallback-rank")) {
    tkgf::apply_config_entry(spec, "fallback_rank", std::to_string(cli.fallback_rank));
  }
  if (passed("--out")) tkgf::apply_config_entry(spec, "out", cli.out);
  if (passed("--seed")) tkgf::apply_config_entry(spec, "seed", std::to_string(cli.seed));

  if (spec.dataset_dir.empty()) throw tkgf::ConfigError("--dataset is required");
  if (spec.dataset_name.empty()) {
    spec.dataset_name = spec.dataset_dir.filename().string();
    if (spec.dataset_name.empty()) {
      spec.dataset_name = spec.dataset_dir.parent_path().filename().string();
    }
  }

  const tkgf::TemporalKG kg = tkgf::TemporalKG::load(spec.dataset_dir);

  // Sweep axes default to the resolved single value.
  std::vector<std::size_t> lengths = {spec.eval.strategy.length};
  if (!cli.sweep_history.empty()) {
    lengths.clear();
    for (int h : cli.sweep_history) lengths.push_back(static_cast<std::size_t>(h));
  }
  std::vector<tkgf::HistoryScope> scopes = {spec.eval.strategy.scope};
  if (!cli.sweep_scope.empty()) {
    scopes.clear();
    for (const std::string& s : cli.sweep_scope) scopes.push_back(tkgf::parse_history_scope(s));
  }
  std::vector<tkgf::HistoryDirection> hist_dirs = {spec.eval.strategy.direction};
  if (!cli.sweep_hist_direction.empty()) {
    hist_dirs.clear();
    for (const std::string& s : cli.sweep_hist_direction) {
      hist_dirs.push_back(tkgf::parse_history_direction(s));
    }
  }
  std::vector<tkgf::PromptStyle> styles = {spec.eval.style};
  if (!cli.sweep_style.empty()) {
    styles.clear();
    for (const std::string& s : cli.sweep_style) styles.push_back(tkgf::parse_prompt_style(s));
  }

  const bool sweeping = lengths.size() * scopes.size() * hist_dirs.size() * styles.size() > 1;
  const fs::path out_root = spec.out_dir;
  for (const std::size_t length : lengths) {
    for (const tkgf::HistoryScope scope : scopes) {
      for (const tkgf::HistoryDirection hist_dir : hist_dirs) {
        for (const tkgf::PromptStyle style : styles) {
          tkgf::RunSpec run = spec;
          run.eval.strategy.length = length;
          run.eval.strategy.scope = scope;
          run.eval.strategy.direction = hist_dir;
          run.eval.style = style;
          if (sweeping) run.out_dir = out_root / run_tag(run);
          execute_run(std::move(run), kg);
        }
      }
    }
  }
  return 0;
}

int cmd_stats(const std::string& dataset) {
  const tkgf::TemporalKG kg = tkgf::TemporalKG::load(dataset);
  std::string name = fs::path(dataset).filename().string();
  if (name.empty()) name = fs::path(dataset).parent_path().filename().string();
  std::cout << tkgf::render_stats(kg.stats(), name);
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
  const tkgf::CompareResult result = tkgf::compare_summaries(a, b);
  if (result.dataset_mismatch) {
    std::cout << "warning: summaries describe different datasets\n";
  }
  std::printf("%-16s %10s %10s %10s\n", "metric", "a", "b", "delta");
  for (const tkgf::MetricDelta& d : result.deltas) {
    std::printf("%-16s %10.4f %10.4f %+10.4f\n", d.metric.c_str(), d.a, d.b, d.delta);
  }
  if (!out.empty()) {
    write_file(out, result.json_text);
    std::printf("wrote %s\n", out.c_str());
  } else {
    std::cout << result.json_text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal knowledge-graph forecasting harness"};
  app.require_subcommand(1);

  // stats
  std::string stats_dataset;
  CLI::App* stats = app.add_subcommand("stats", "print dataset statistics as JSON");
  stats->add_option("--dataset", stats_dataset, "dataset directory")->required();

  // run
  RunCli run_cli;
  CLI::App* run = app.add_subcommand("run", "evaluate a backend on a dataset");
  run->add_option("--dataset", run_cli.dataset, "dataset directory");
  run->add_option("--config", run_cli.config_file, "flat key=value config file");
  run->add_option("--backend", run_cli.backend,
                  "frequency | recency | mock | http | http-chat");
  run->add_option("--endpoint", run_cli.endpoint, "model endpoint URL");
  run->add_option("--model", run_cli.model, "model name sent to the endpoint");
  run->add_option("--auth-env", run_cli.auth_env, "env var holding the bearer token");
  run->add_option("--timeout-ms", run_cli.timeout_ms, "per-request timeout");
  run->add_option("--max-inflight", run_cli.max_inflight, "max concurrent requests");
  run->add_option("--retries", run_cli.retries, "retries per request");
  run->add_option("--mock-script", run_cli.mock_script, "mock backend script JSON");
  run->add_option("--history", run_cli.history, "history length (max facts in prompt)");
  run->add_option("--scope", run_cli.scope, "entity | pair");
  run->add_option("--hist-direction", run_cli.hist_direction, "uni | bi");
  run->add_option("--style", run_cli.style, "index | lexical");
  run->add_option("--mode", run_cli.mode, "single | multi");
  run->add_option("--feedback-k", run_cli.feedback_k, "multi-step predictions fed back");
  run->add_option("--directions", run_cli.directions, "tail | head | both");
  run->add_flag("--no-time", run_cli.no_time, "drop timestamps from prompts");
  run->add_option("--shuffle-seed", run_cli.shuffle_seed,
                  "shuffle history lines (requires --no-time)");
  run->add_option("--fallback-rank", run_cli.fallback_rank,
                  "rank assigned when gold never decodes");
  run->add_option("--out", run_cli.out, "output directory");
  run->add_option("--seed", run_cli.seed, "run seed (echoed into the summary)");
  run->add_option("--sweep-history", run_cli.sweep_history, "history lengths to sweep")
      ->delimiter(',');
  run->add_option("--sweep-scope", run_cli.sweep_scope, "scopes to sweep")->delimiter(',');
  run->add_option("--sweep-hist-direction", run_cli.sweep_hist_direction,
                  "history directions to sweep")
      ->delimiter(',');
  run->add_option("--sweep-style", run_cli.sweep_style, "styles to sweep")->delimiter(',');

  // compare
  std::string compare_a, compare_b, compare_out;
  CLI::App* compare = app.add_subcommand("compare", "diff two run summaries");
  compare->add_option("a", compare_a, "first summary.json")->required();
  compare->add_option("b", compare_b, "second summary.json")->required();
  compare->add_option("--out", compare_out, "write the delta table as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(stats_dataset);
    if (run->parsed()) return cmd_run(run_cli, *run);
    if (compare->parsed()) return cmd_compare(compare_a, compare_b, compare_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
