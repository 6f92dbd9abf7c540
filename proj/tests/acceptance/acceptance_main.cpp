// Acceptance suite. Each criterion prints one "criterion N: PASS|FAIL|SKIP"
// line (sub-criteria print their own letter). Exit codes: 0 all executed
// criteria passed, 77 something was skipped (benchmark data not prepared)
// and the rest passed, 1 any failure.
//
// Benchmark-backed criteria (1-4) expect prepared dataset directories
// (train.txt / valid.txt / test.txt / entity2id.txt / relation2id.txt)
// under --datasets (default: $TKGF_DATASETS, then <repo>/datasets).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "tkgf/decode.hpp"
#include "tkgf/evaluation.hpp"
#include "tkgf/http_backend.hpp"
#include "tkgf/prompt.hpp"
#include "tkgf/report_io.hpp"
#include "tkgf/temporal_kg.hpp"

namespace fs = std::filesystem;
using namespace tkgf;

namespace {

constexpr double kTolerance = 0.02;

struct Expected {
  const char* name;
  std::uint64_t entities, relations, train, valid, test;
  std::vector<std::int64_t> interval_units;  // accepted raw encodings of one step
};

const std::vector<Expected> kDatasetTable = {
    {"WIKI", 12554, 24, 539286, 67538, 63110, {1}},
    {"YAGO", 10623, 10, 161540, 19523, 20026, {1}},
    {"ICEWS14", 6869, 230, 74845, 8514, 7371, {24, 1}},
    {"ICEWS18", 23033, 256, 373018, 45995, 49995, {24, 1}},
    {"ACLED-CD22", 243, 6, 1788, 216, 222, {1}},
};

struct Outcome {
  int passed = 0;
  int failed = 0;
  int skipped = 0;

  void report(const std::string& id, bool ok, const std::string& detail) {
    std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << " - " << detail
              << "\n";
    ok ? ++passed : ++failed;
  }
  void skip(const std::string& id, const std::string& detail) {
    std::cout << "criterion " << id << ": SKIP - " << detail << "\n";
    ++skipped;
  }
};

fs::path datasets_root;

std::optional<fs::path> find_dataset(const std::string& name) {
  std::string lower = name;
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  for (const fs::path& candidate : {datasets_root / name, datasets_root / lower}) {
    if (fs::exists(candidate / "train.txt")) return candidate;
  }
  return std::nullopt;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::fixed << v;
  return out.str();
}

bool close3(const HitsTable& got, double h1, double h3, double h10) {
  return std::abs(got.at1 - h1) <= kTolerance && std::abs(got.at3 - h3) <= kTolerance &&
         std::abs(got.at10 - h10) <= kTolerance;
}

// ---------------------------------------------------------------------
// Criterion 1: dataset statistics reproduce the published table.

void criterion1(Outcome& out) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::string> missing;
  std::vector<std::string> wrong;
  for (const Expected& expected : kDatasetTable) {
    const auto dir = find_dataset(expected.name);
    if (!dir) {
      missing.push_back(expected.name);
      continue;
    }
    const DatasetStats stats = TemporalKG::load(*dir).stats();
    const auto check = [&](const char* what, std::uint64_t got, std::uint64_t want) {
      if (got != want) {
        wrong.push_back(std::string(expected.name) + "." + what + "=" +
                        std::to_string(got) + " (want " + std::to_string(want) + ")");
      }
    };
    check("entities", stats.entities, expected.entities);
    check("relations", stats.relations, expected.relations);
    check("train", stats.train, expected.train);
    check("valid", stats.valid, expected.valid);
    check("test", stats.test, expected.test);
    if (std::find(expected.interval_units.begin(), expected.interval_units.end(),
                  stats.interval_raw_units) == expected.interval_units.end()) {
      wrong.push_back(std::string(expected.name) + ".interval_raw_units=" +
                      std::to_string(stats.interval_raw_units));
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!missing.empty() && wrong.empty()) {
    std::string names;
    for (const std::string& m : missing) names += (names.empty() ? "" : ", ") + m;
    out.skip("1", "benchmark data not prepared under " + datasets_root.string() + ": " +
                      names);
    return;
  }
  if (!wrong.empty()) {
    std::string detail;
    for (const std::string& w : wrong) detail += (detail.empty() ? "" : "; ") + w;
    out.report("1", false, detail);
    return;
  }
  const bool in_time = seconds < 30.0;
  out.report("1", in_time,
             "all 5 datasets x 6 stats exact, loaded in " + fmt(seconds) + "s" +
                 (in_time ? "" : " (budget 30s exceeded)"));
}

// ---------------------------------------------------------------------
// Heuristic reproduction helpers (criteria 2-4).

struct HeuristicRuns {
  // (scope, directions) -> hits, per backend.
  std::map<std::pair<int, int>, HitsTable> frequency;
  std::map<std::pair<int, int>, HitsTable> recency;
  double seconds = 0.0;
};

HeuristicRuns run_heuristic_matrix(const TemporalKG& kg, EvalMode mode) {
  HeuristicRuns runs;
  const auto started = std::chrono::steady_clock::now();
  for (const HistoryScope scope : {HistoryScope::entity, HistoryScope::pair}) {
    for (const EvalDirections dirs : {EvalDirections::tail_only, EvalDirections::both}) {
      const auto queries = collate(kg.test_facts(), dirs);
      EvalConfig cfg;
      cfg.mode = mode;
      cfg.strategy = {scope, HistoryDirection::unidirectional, 100};
      cfg.directions = dirs;
      const std::pair<int, int> key{scope == HistoryScope::pair,
                                    dirs == EvalDirections::both};
      FrequencyBackend freq;
      RecencyBackend rec;
      if (mode == EvalMode::single_step) {
        runs.frequency[key] = run_single_step(kg, queries, freq, cfg).time_aware;
        runs.recency[key] = run_single_step(kg, queries, rec, cfg).time_aware;
      } else {
        runs.frequency[key] = run_multi_step(kg, queries, freq, cfg).time_aware;
        runs.recency[key] = run_multi_step(kg, queries, rec, cfg).time_aware;
      }
    }
  }
  runs.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return runs;
}

std::string config_name(const std::pair<int, int>& key) {
  return std::string(key.first ? "pair" : "entity") + "/" +
         (key.second ? "both" : "tail");
}

void criterion2(Outcome& out) {
  const auto icews14 = find_dataset("ICEWS14");
  const auto icews18 = find_dataset("ICEWS18");
  if (!icews14 || !icews18) {
    out.skip("2", "ICEWS14/ICEWS18 not prepared under " + datasets_root.string());
    return;
  }

  const TemporalKG kg14 = TemporalKG::load(*icews14);
  const HeuristicRuns r14 = run_heuristic_matrix(kg14, EvalMode::single_step);
  std::string match14;
  for (const auto& [key, freq_hits] : r14.frequency) {
    if (close3(freq_hits, 0.243, 0.387, 0.532) &&
        close3(r14.recency.at(key), 0.228, 0.387, 0.536)) {
      match14 = config_name(key);
      break;
    }
  }

  const TemporalKG kg18 = TemporalKG::load(*icews18);
  const HeuristicRuns r18 = run_heuristic_matrix(kg18, EvalMode::single_step);
  std::string match18;
  for (const auto& [key, freq_hits] : r18.frequency) {
    if (close3(freq_hits, 0.141, 0.265, 0.409)) {
      match18 = config_name(key);
      break;
    }
  }

  std::ostringstream detail;
  detail << "ICEWS14 " << (match14.empty() ? "no matching config" : match14);
  const auto& best14 = r14.frequency.begin()->second;
  detail << " (e.g. freq " << fmt(best14.at1) << "/" << fmt(best14.at3) << "/"
         << fmt(best14.at10) << ")";
  detail << "; ICEWS18 " << (match18.empty() ? "no matching config" : match18);
  detail << "; " << fmt(r14.seconds) << "s + " << fmt(r18.seconds) << "s";
  const bool in_time = r14.seconds < 600.0 && r18.seconds < 600.0;
  out.report("2", !match14.empty() && !match18.empty() && in_time, detail.str());
}

void criterion3(Outcome& out) {
  const auto icews14 = find_dataset("ICEWS14");
  if (!icews14) {
    out.skip("3", "ICEWS14 not prepared under " + datasets_root.string());
    return;
  }
  const TemporalKG kg = TemporalKG::load(*icews14);
  const HeuristicRuns runs = run_heuristic_matrix(kg, EvalMode::multi_step);
  std::string match;
  for (const auto& [key, freq_hits] : runs.frequency) {
    if (close3(freq_hits, 0.222, 0.349, 0.460) &&
        close3(runs.recency.at(key), 0.151, 0.268, 0.423)) {
      match = config_name(key);
      break;
    }
  }
  out.report("3", !match.empty(),
             match.empty() ? "no configuration matched the multi-step table"
                           : "multi-step ICEWS14 matched under " + match);
}

void criterion4(Outcome& out) {
  const auto yago = find_dataset("YAGO");
  const auto wiki = find_dataset("WIKI");
  if (!yago || !wiki) {
    out.skip("4", "YAGO/WIKI not prepared under " + datasets_root.string());
    return;
  }
  const HeuristicRuns yago_runs = run_heuristic_matrix(TemporalKG::load(*yago),
                                                       EvalMode::single_step);
  bool yago_ok = false;
  for (const auto& [key, hits] : yago_runs.recency) {
    yago_ok = yago_ok || std::abs(hits.at1 - 0.886) <= kTolerance;
  }
  const HeuristicRuns wiki_runs = run_heuristic_matrix(TemporalKG::load(*wiki),
                                                       EvalMode::single_step);
  bool wiki_ok = false;
  for (const auto& [key, hits] : wiki_runs.recency) {
    wiki_ok = wiki_ok || std::abs(hits.at1 - 0.701) <= kTolerance;
  }
  std::ostringstream detail;
  detail << "YAGO recency H@1 " << (yago_ok ? "within" : "outside") << " 0.886+/-0.02, "
         << "WIKI " << (wiki_ok ? "within" : "outside") << " 0.701+/-0.02";
  out.report("4", yago_ok && wiki_ok, detail.str());
}

// ---------------------------------------------------------------------
// Criterion 5: property-based substitutes for the LLM tables.

void criterion5a(Outcome& out) {
  std::mt19937_64 rng(20240517);
  std::size_t agree = 0;
  const std::size_t total = 10000;
  for (std::size_t trial = 0; trial < total; ++trial) {
    const std::size_t n = rng() % 12;
    std::vector<EntityId> pool;
    for (EntityId e = 0; e < 14; ++e) pool.push_back(e);
    RankedPrediction prediction;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = rng() % pool.size();
      prediction.ranking.emplace_back(pool[pick], -static_cast<double>(i));
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    prediction.no_prediction = prediction.ranking.empty() && rng() % 2 == 0;
    const EntityId gold = static_cast<EntityId>(rng() % 14);
    std::vector<EntityId> other_valid;
    for (EntityId e = 0; e < 14; ++e) {
      if (e != gold && rng() % 3 == 0) other_valid.push_back(e);
    }
    const int got =
        rank_of(gold, prediction, other_valid, RankFilter::time_aware, 100);
    const int want =
        test::oracle_rank(gold, prediction, other_valid, RankFilter::time_aware, 100);
    if (got == want) ++agree;
  }
  out.report("5a", agree == total,
             std::to_string(agree) + "/" + std::to_string(total) +
                 " filtered ranks agree with the re-ranking oracle");
}

void criterion5b(Outcome& out) {
  std::mt19937_64 rng(20240518);
  std::size_t agree = 0;
  const std::size_t total = 1000;
  for (std::size_t trial = 0; trial < total; ++trial) {
    const int num_labels = 1 + static_cast<int>(rng() % 40);
    LabelMap labels;
    for (int i = 0; i < num_labels; ++i) labels.assign(static_cast<EntityId>(1000 + i));
    std::vector<TokenEntry> entries;
    const std::size_t n = rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      std::string token;
      switch (rng() % 4) {
        case 0: token = std::to_string(rng() % 50); break;
        case 1: token = " " + std::to_string(rng() % 50); break;
        case 2: token = "word" + std::to_string(rng() % 8); break;
        default: token = std::to_string(rng() % 50) + "."; break;
      }
      entries.push_back({token, -static_cast<double>(rng() % 800) / 100.0});
    }
    const BackendResponse response = BackendResponse::from_distribution(
        TokenDistribution::from_entries(std::move(entries)));
    const RankedPrediction got = decode(response, labels);
    const RankedPrediction want = test::oracle_decode(response, labels);
    if (got.no_prediction == want.no_prediction && got.ranking == want.ranking) ++agree;
  }
  out.report("5b", agree == total,
             std::to_string(agree) + "/" + std::to_string(total) +
                 " decodes agree with the exhaustive filter-sort oracle");
}

void criterion5c(Outcome& out) {
  bool ok = true;
  std::string detail;

  const auto check_invariants = [&](const EvalReport& report, const std::string& tag) {
    const bool monotone = report.raw.at1 <= report.raw.at3 &&
                          report.raw.at3 <= report.raw.at10 &&
                          report.time_aware.at1 <= report.time_aware.at3 &&
                          report.time_aware.at3 <= report.time_aware.at10;
    const bool filtered_ge = report.time_aware.at1 >= report.raw.at1 &&
                             report.time_aware.at3 >= report.raw.at3 &&
                             report.time_aware.at10 >= report.raw.at10;
    if (!monotone || !filtered_ge) {
      ok = false;
      detail += tag + " violated invariants; ";
    }
  };

  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const TemporalKG kg = test::random_kg({.entities = 18, .relations = 3, .facts = 400,
                                           .max_timestamp = 14, .seed = seed});
    const auto queries = collate(kg.test_facts(), EvalDirections::both);
    EvalConfig cfg;
    cfg.directions = EvalDirections::both;
    cfg.strategy.length = 1 + seed * 7;
    MockBackend mock{MockBackend::Script{}};
    FrequencyBackend freq;
    RecencyBackend rec;
    check_invariants(run_single_step(kg, queries, mock, cfg), "mock/single");
    check_invariants(run_multi_step(kg, queries, mock, cfg), "mock/multi");
    check_invariants(run_single_step(kg, queries, freq, cfg), "freq/single");
    check_invariants(run_single_step(kg, queries, rec, cfg), "rec/single");
  }

  // Perfect oracle on single-gold data: Hits@1 = 1.0 in both modes.
  std::vector<Quadruple> train, valid, test;
  for (EntityId s = 0; s < 8; ++s) {
    for (Timestamp t = 0; t < 3; ++t) train.push_back({s, s % 2, s + 8, t});
    valid.push_back({s, s % 2, s + 8, 3});
    for (Timestamp t = 4; t < 8; ++t) test.push_back({s, s % 2, s + 8, t});
  }
  const TemporalKG kg = test::make_kg(16, 2, train, valid, test);
  const auto queries = collate(kg.test_facts(), EvalDirections::tail_only);
  test::PerfectBackend perfect;
  EvalConfig cfg;
  cfg.directions = EvalDirections::tail_only;
  cfg.strategy = {HistoryScope::pair, HistoryDirection::unidirectional, 100};
  const EvalReport single = run_single_step(kg, queries, perfect, cfg);
  const EvalReport multi = run_multi_step(kg, queries, perfect, cfg);
  if (single.time_aware.at1 != 1.0 || multi.time_aware.at1 != 1.0) {
    ok = false;
    detail += "perfect oracle Hits@1 " + fmt(single.time_aware.at1) + "/" +
              fmt(multi.time_aware.at1) + " != 1.0; ";
  }

  out.report("5c", ok, ok ? "rank invariants hold on every run; perfect oracle at 1.0"
                          : detail);
}

void criterion5d(Outcome& out) {
  const fs::path testdata = TKGF_TESTDATA_DIR;
  const TemporalKG kg = TemporalKG::load(testdata / "acled_mini");
  const ForecastQuery query{0, 1, QueryDirection::tail_prediction, 571, {53}};
  const HistoryWindow window = retrieve_history(
      kg, query, {HistoryScope::entity, HistoryDirection::unidirectional, 5});

  struct GoldenCase {
    const char* file;
    PromptStyle style;
    PromptOptions opts;
  };
  const std::vector<GoldenCase> cases = {
      {"acled_index.golden", PromptStyle::index, {}},
      {"acled_lexical.golden", PromptStyle::lexical, {}},
      {"acled_index_no_time.golden", PromptStyle::index,
       {.include_time = false, .shuffle_seed = {}}},
      {"acled_index_no_time_shuffled_seed7.golden",
       PromptStyle::index,
       {.include_time = false, .shuffle_seed = 7}},
  };
  bool ok = true;
  std::string detail;
  for (const GoldenCase& c : cases) {
    const Prompt prompt =
        build_prompt(window, query, kg.entities(), kg.relations(), c.style, c.opts);
    const std::string expected = test::read_text_file(testdata / "prompts" / c.file);
    if (expected.empty() || prompt.text != expected) {
      ok = false;
      detail += std::string(c.file) + " mismatch; ";
    }
  }
  out.report("5d", ok, ok ? "4 golden prompt fixtures byte-identical" : detail);
}

void criterion5e(Outcome& out) {
  const TemporalKG kg = test::random_kg({.entities = 14, .relations = 3, .facts = 350,
                                         .max_timestamp = 12, .seed = 2718});
  const auto queries = collate(kg.test_facts(), EvalDirections::both);
  EvalConfig cfg;
  cfg.directions = EvalDirections::both;
  const auto run_once = [&] {
    MockBackend backend{MockBackend::Script{}};
    std::ostringstream log;
    write_query_log(run_multi_step(kg, queries, backend, cfg), log);
    return log.str();
  };
  const std::string a = run_once();
  const std::string b = run_once();
  out.report("5e", !a.empty() && a == b,
             "two mock runs produced " + std::to_string(a.size()) +
                 " identical JSONL bytes");
}

// ---------------------------------------------------------------------
// Criterion 6: end-to-end HTTP path against the scripted stub server.

void criterion6(Outcome& out) {
  // 25 subjects x 4 test timestamps = 100 collated tail queries.
  std::vector<Quadruple> train, valid, test;
  for (EntityId s = 0; s < 25; ++s) {
    const RelationId r = s % 2;
    const EntityId a = 25 + s;
    const EntityId b = 25 + (s + 1) % 25;
    const EntityId c = 50 + (s % 10);
    train.push_back({s, r, a, 0});
    train.push_back({s, r, b, 1});
    train.push_back({s, r, c, 2});
    train.push_back({s, r, a, 3});
    for (Timestamp t = 10; t < 14; ++t) test.push_back({s, r, a, t});
  }
  valid.push_back({50, 1, 51, 5});
  valid.push_back({52, 1, 53, 6});
  const TemporalKG kg = test::make_kg(60, 2, train, valid, test);

  EvalConfig cfg;
  cfg.directions = EvalDirections::tail_only;
  cfg.strategy = {HistoryScope::entity, HistoryDirection::unidirectional, 100};
  const auto queries = collate(kg.test_facts(), cfg.directions);
  if (queries.size() != 100) {
    out.report("6", false, "expected 100 queries, got " + std::to_string(queries.size()));
    return;
  }

  // Script the server per prompt text: gold at rank (i % 3) + 1, and
  // every 10th query answered without any digit token.
  test::StubLlmServer server;
  server.set_default_tokens({{"unexpected", -1.0}});
  std::vector<int> expected_rank(queries.size(), 0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const ForecastQuery canonical = canonicalize(queries[i], kg.num_base_relations());
    const HistoryWindow window = retrieve_history(kg, canonical, cfg.strategy);
    const Prompt prompt = build_prompt(window, canonical, kg.entities(), kg.relations(),
                                       cfg.style, cfg.prompt_opts);
    if (i % 10 == 9) {
      server.script_prompt(prompt.text, {{"the", -0.5}, {"and", -1.5}});
      expected_rank[i] = cfg.fallback_rank;
      continue;
    }
    const int gold_label = *prompt.labels.label_of(canonical.gold.front());
    std::vector<int> order;
    for (int label = 0; label < prompt.labels.size() && order.size() < 3; ++label) {
      if (label != gold_label) order.push_back(label);
    }
    const int gold_pos = static_cast<int>(i % 3);
    order.insert(order.begin() + std::min<std::ptrdiff_t>(gold_pos, order.size()),
                 gold_label);
    test::StubLlmServer::TokenList tokens;
    for (std::size_t p = 0; p < order.size(); ++p) {
      tokens.push_back({" " + std::to_string(order[p]),
                        -0.1 * (static_cast<double>(p) + 1.0)});
    }
    server.script_prompt(prompt.text, tokens);
    expected_rank[i] = gold_pos + 1;
  }
  server.fail_next(1, 429);  // exactly one request is retried

  HttpConfig http;
  http.endpoint = server.completions_url();
  http.model = "stub-model";
  http.max_inflight = 4;
  http.retries = 3;
  http.backoff_base_ms = 5;
  http.timeout_ms = 5000;
  HttpCompletionBackend backend(http);

  const EvalReport report = run_single_step(kg, queries, backend, cfg);

  bool ok = report.results.size() == queries.size();
  std::string detail;
  std::size_t fallback_count = 0;
  for (std::size_t i = 0; ok && i < report.results.size(); ++i) {
    const GoldOutcome& outcome = report.results[i].golds.at(0);
    if (outcome.raw_rank != expected_rank[i] ||
        outcome.filtered_rank != expected_rank[i]) {
      ok = false;
      detail = "query " + std::to_string(i) + " rank " +
               std::to_string(outcome.filtered_rank) + " != expected " +
               std::to_string(expected_rank[i]);
    }
    if (outcome.filtered_rank == cfg.fallback_rank) ++fallback_count;
  }
  if (ok && fallback_count != 10) {
    ok = false;
    detail = "expected 10 rank-100 fallbacks, got " + std::to_string(fallback_count);
  }
  const int total_requests = server.request_count();
  if (ok && total_requests != static_cast<int>(queries.size()) + 1) {
    ok = false;
    detail = "expected 101 requests (one retried), got " + std::to_string(total_requests);
  }
  out.report("6", ok,
             ok ? "100-query run: ranks exact, one 429 retried, 10 no-prediction "
                  "fallbacks"
                : detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string criterion = "all";
  datasets_root = TKGF_DEFAULT_DATASETS_DIR;
  if (const char* env = std::getenv("TKGF_DATASETS"); env != nullptr && *env != '\0') {
    datasets_root = env;
  }
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      criterion = argv[++i];
    } else if (arg == "--datasets" && i + 1 < argc) {
      datasets_root = argv[++i];
    } else {
      std::cerr << "usage: tkgf_acceptance [--criterion 1|2|3|4|5|6|all] [--datasets DIR]\n";
      return 2;
    }
  }

  Outcome out;
  const auto want = [&](const char* id) { return criterion == "all" || criterion == id; };
  if (want("1")) criterion1(out);
  if (want("2")) criterion2(out);
  if (want("3")) criterion3(out);
  if (want("4")) criterion4(out);
  if (want("5")) {
    criterion5a(out);
    criterion5b(out);
    criterion5c(out);
    criterion5d(out);
    criterion5e(out);
  }
  if (want("6")) criterion6(out);

  if (out.failed > 0) return 1;
  if (out.skipped > 0) return 77;
  return 0;
}
