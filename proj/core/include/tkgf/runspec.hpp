#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "tkgf/backend.hpp"
#include "tkgf/evaluation.hpp"
#include "tkgf/http_backend.hpp"

namespace tkgf {

enum class BackendKind { frequency, recency, mock, http_completion, http_chat };

struct BackendSpec {
  BackendKind kind = BackendKind::frequency;
  HttpConfig http;
  std::filesystem::path mock_script;  // optional fingerprint-keyed script JSON
};

/// Everything one experiment run needs; echoed verbatim into the
/// summary so results stay reproducible.
struct RunSpec {
  std::filesystem::path dataset_dir;
  std::string dataset_name;  // defaults to the directory name
  EvalConfig eval;
  BackendSpec backend;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
};

std::string to_string(BackendKind kind);
std::string to_string(HistoryScope scope);
std::string to_string(HistoryDirection direction);
std::string to_string(PromptStyle style);
std::string to_string(EvalMode mode);
std::string to_string(EvalDirections directions);

BackendKind parse_backend_kind(std::string_view text);
HistoryScope parse_history_scope(std::string_view text);
HistoryDirection parse_history_direction(std::string_view text);
PromptStyle parse_prompt_style(std::string_view text);
EvalMode parse_eval_mode(std::string_view text);
EvalDirections parse_eval_directions(std::string_view text);

/// Reads a flat "key = value" config file (# starts a comment). Keys
/// follow the documented surface: backend.kind, backend.endpoint,
/// backend.model, backend.auth_env, backend.timeout_ms,
/// backend.max_inflight, backend.retries, dataset, history, scope,
/// hist_direction, style, mode, feedback_k, directions, no_time,
/// shuffle_seed, fallback_rank, out, seed, mock_script.
std::map<std::string, std::string> parse_flat_config(const std::filesystem::path& file);

/// Applies one config entry. Throws ConfigError for unknown keys or
/// unparseable values.
void apply_config_entry(RunSpec& spec, std::string_view key, std::string_view value);

void apply_config_file(RunSpec& spec, const std::filesystem::path& file);

/// Loads a mock-backend script: {"fallback": "uniform"|"none",
/// "prompts": {"<fingerprint>": {"tokens": [[text, logprob], ...]}
///                            | {"completion": "..."}}}.
MockBackend::Script load_mock_script(const std::filesystem::path& file);

/// Instantiates the configured backend. Misconfiguration (missing
/// endpoint, unset auth variable, unreadable script) fails here,
/// before any query runs.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

}  // namespace tkgf
