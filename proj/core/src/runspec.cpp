#include "tkgf/runspec.hpp"

#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tkgf/errors.hpp"

namespace tkgf {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::int64_t parse_int(std::string_view value, std::string_view key) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "' expects an integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view value, std::string_view key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "' expects a boolean, got '" +
                    std::string(value) + "'");
}

[[noreturn]] void bad_value(std::string_view what, std::string_view text) {
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

}  // namespace

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::frequency: return "frequency";
    case BackendKind::recency: return "recency";
    case BackendKind::mock: return "mock";
    case BackendKind::http_completion: return "http";
    case BackendKind::http_chat: return "http-chat";
  }
  return "?";
}

std::string to_string(HistoryScope scope) {
  return scope == HistoryScope::entity ? "entity" : "pair";
}

std::string to_string(HistoryDirection direction) {
  return direction == HistoryDirection::unidirectional ? "uni" : "bi";
}

std::string to_string(PromptStyle style) {
  return style == PromptStyle::index ? "index" : "lexical";
}

std::string to_string(EvalMode mode) {
  return mode == EvalMode::single_step ? "single" : "multi";
}

std::string to_string(EvalDirections directions) {
  switch (directions) {
    case EvalDirections::tail_only: return "tail";
    case EvalDirections::head_only: return "head";
    case EvalDirections::both: return "both";
  }
  return "?";
}

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "frequency") return BackendKind::frequency;
  if (text == "recency") return BackendKind::recency;
  if (text == "mock") return BackendKind::mock;
  if (text == "http") return BackendKind::http_completion;
  if (text == "http-chat" || text == "http_chat") return BackendKind::http_chat;
  bad_value("backend kind", text);
}

HistoryScope parse_history_scope(std::string_view text) {
  if (text == "entity") return HistoryScope::entity;
  if (text == "pair") return HistoryScope::pair;
  bad_value("history scope", text);
}

HistoryDirection parse_history_direction(std::string_view text) {
  if (text == "uni" || text == "unidirectional") return HistoryDirection::unidirectional;
  if (text == "bi" || text == "bidirectional") return HistoryDirection::bidirectional;
  bad_value("history direction", text);
}

PromptStyle parse_prompt_style(std::string_view text) {
  if (text == "index") return PromptStyle::index;
  if (text == "lexical") return PromptStyle::lexical;
  bad_value("prompt style", text);
}

EvalMode parse_eval_mode(std::string_view text) {
  if (text == "single") return EvalMode::single_step;
  if (text == "multi") return EvalMode::multi_step;
  bad_value("evaluation mode", text);
}

EvalDirections parse_eval_directions(std::string_view text) {
  if (text == "tail") return EvalDirections::tail_only;
  if (text == "head") return EvalDirections::head_only;
  if (text == "both") return EvalDirections::both;
  bad_value("query directions", text);
}

std::map<std::string, std::string> parse_flat_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());

  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key(trim(stripped.substr(0, eq)));
    const std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    entries[key] = value;
  }
  return entries;
}

void apply_config_entry(RunSpec& spec, std::string_view key, std::string_view value) {
  if (key == "dataset") {
    spec.dataset_dir = std::string(value);
  } else if (key == "dataset_name") {
    spec.dataset_name = std::string(value);
  } else if (key == "out") {
    spec.out_dir = std::string(value);
  } else if (key == "seed") {
    spec.seed = static_cast<std::uint64_t>(parse_int(value, key));
  } else if (key == "mode") {
    spec.eval.mode = parse_eval_mode(value);
  } else if (key == "feedback_k") {
    spec.eval.feedback_k = static_cast<int>(parse_int(value, key));
  } else if (key == "history") {
    spec.eval.strategy.length = static_cast<std::size_t>(parse_int(value, key));
  } else if (key == "scope") {
    spec.eval.strategy.scope = parse_history_scope(value);
  } else if (key == "hist_direction") {
    spec.eval.strategy.direction = parse_history_direction(value);
  } else if (key == "style") {
    spec.eval.style = parse_prompt_style(value);
  } else if (key == "directions") {
    spec.eval.directions = parse_eval_directions(value);
  } else if (key == "no_time") {
    spec.eval.prompt_opts.include_time = !parse_bool(value, key);
  } else if (key == "shuffle_seed") {
    spec.eval.prompt_opts.shuffle_seed = static_cast<std::uint64_t>(parse_int(value, key));
  } else if (key == "fallback_rank") {
    spec.eval.fallback_rank = static_cast<int>(parse_int(value, key));
  } else if (key == "mock_script") {
    spec.backend.mock_script = std::string(value);
  } else if (key == "backend.kind") {
    spec.backend.kind = parse_backend_kind(value);
  } else if (key == "backend.endpoint") {
    spec.backend.http.endpoint = std::string(value);
  } else if (key == "backend.model") {
    spec.backend.http.model = std::string(value);
  } else if (key == "backend.auth_env") {
    spec.backend.http.auth_env = std::string(value);
  } else if (key == "backend.timeout_ms") {
    spec.backend.http.timeout_ms = static_cast<int>(parse_int(value, key));
  } else if (key == "backend.max_inflight") {
    spec.backend.http.max_inflight = static_cast<int>(parse_int(value, key));
  } else if (key == "backend.retries") {
    spec.backend.http.retries = static_cast<int>(parse_int(value, key));
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void apply_config_file(RunSpec& spec, const std::filesystem::path& file) {
  for (const auto& [key, value] : parse_flat_config(file)) {
    apply_config_entry(spec, key, value);
  }
}

namespace {

// Separated from the IO so json type errors can be mapped to SchemaError
// in one place.
MockBackend::Script interpret_mock_script(const json& doc) {
  MockBackend::Script script;
  if (doc.contains("fallback")) {
    const std::string fallback = doc["fallback"].get<std::string>();
    if (fallback == "uniform") {
      script.uniform_fallback = true;
    } else if (fallback == "none") {
      script.uniform_fallback = false;
    } else {
      throw SchemaError("mock script fallback must be 'uniform' or 'none'");
    }
  }
  if (!doc.contains("prompts")) return script;
  if (!doc["prompts"].is_object()) throw SchemaError("mock script 'prompts' must be an object");

  for (const auto& [fingerprint, entry] : doc["prompts"].items()) {
    if (entry.contains("completion")) {
      script.by_fingerprint.emplace(
          fingerprint,
          BackendResponse::from_completion(entry["completion"].get<std::string>()));
      continue;
    }
    if (!entry.contains("tokens") || !entry["tokens"].is_array()) {
      throw SchemaError("mock script entry for " + fingerprint +
                        " needs 'tokens' or 'completion'");
    }
    std::vector<TokenEntry> tokens;
    for (const json& pair : entry["tokens"]) {
      if (!pair.is_array() || pair.size() != 2) {
        throw SchemaError("mock script tokens must be [text, logprob] pairs");
      }
      tokens.push_back({pair[0].get<std::string>(), pair[1].get<double>()});
    }
    script.by_fingerprint.emplace(
        fingerprint,
        BackendResponse::from_distribution(TokenDistribution::from_entries(std::move(tokens))));
  }
  return script;
}

}  // namespace

MockBackend::Script load_mock_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open mock script: " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError("mock script " + file.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw SchemaError("mock script " + file.string() + ": expected a JSON object");
  }
  try {
    return interpret_mock_script(doc);
  } catch (const json::exception& e) {
    throw SchemaError("mock script " + file.string() + ": " + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendKind::frequency:
      return std::make_unique<FrequencyBackend>();
    case BackendKind::recency:
      return std::make_unique<RecencyBackend>();
    case BackendKind::mock: {
      MockBackend::Script script;
      if (!spec.mock_script.empty()) script = load_mock_script(spec.mock_script);
      return std::make_unique<MockBackend>(std::move(script));
    }
    case BackendKind::http_completion:
      return std::make_unique<HttpCompletionBackend>(spec.http);
    case BackendKind::http_chat:
      return std::make_unique<HttpChatBackend>(spec.http);
  }
  throw ConfigError("unsupported backend kind");
}

}  // namespace tkgf
