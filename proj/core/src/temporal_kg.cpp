#include "tkgf/temporal_kg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace tkgf {

namespace {

std::uint64_t pair_key(EntityId entity, RelationId relation) {
  return (static_cast<std::uint64_t>(entity) << 32) | relation;
}

std::string location(const std::filesystem::path& file, std::size_t line_no) {
  return file.string() + ":" + std::to_string(line_no);
}

// Strips a trailing '\r' so CRLF files parse like LF files.
std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::int64_t parse_int64(std::string_view field, const std::filesystem::path& file,
                         std::size_t line_no) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ParseError(location(file, line_no) + ": non-integer field '" +
                     std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

struct RawSplit {
  std::vector<Quadruple> facts;  // timestamps still raw
};

RawSplit parse_raw_quadruples(const std::filesystem::path& path,
                              const Dictionary& entity_dict,
                              const Dictionary& relation_dict) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open quadruple file: " + path.string());

  RawSplit split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = chomp(line);
    if (trimmed.empty()) continue;

    const auto fields = split_tabs(trimmed);
    if (fields.size() < 4) {
      throw ParseError(location(path, line_no) + ": expected at least 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }

    const std::int64_t s = parse_int64(fields[0], path, line_no);
    const std::int64_t r = parse_int64(fields[1], path, line_no);
    const std::int64_t o = parse_int64(fields[2], path, line_no);
    const std::int64_t t = parse_int64(fields[3], path, line_no);
    if (s < 0 || r < 0 || o < 0 || t < 0) {
      throw ParseError(location(path, line_no) + ": negative field");
    }
    if (s >= entity_dict.size() || o >= entity_dict.size()) {
      throw ReferenceError(location(path, line_no) + ": entity id out of range (|V|=" +
                           std::to_string(entity_dict.size()) + ")");
    }
    if (r >= relation_dict.size()) {
      throw ReferenceError(location(path, line_no) + ": relation id out of range (|R|=" +
                           std::to_string(relation_dict.size()) + ")");
    }
    split.facts.push_back(Quadruple{static_cast<EntityId>(s), static_cast<RelationId>(r),
                                    static_cast<EntityId>(o), t});
  }
  return split;
}

TimeScale infer_time_scale(std::span<const RawSplit> splits) {
  TimeScale scale;
  bool any = false;
  std::int64_t raw_min = 0;
  for (const RawSplit& split : splits) {
    for (const Quadruple& q : split.facts) {
      if (!any || q.timestamp < raw_min) raw_min = q.timestamp;
      any = true;
    }
  }
  if (!any) return scale;

  std::int64_t unit = 0;
  for (const RawSplit& split : splits) {
    for (const Quadruple& q : split.facts) {
      unit = std::gcd(unit, q.timestamp - raw_min);
    }
  }
  scale.raw_min = raw_min;
  scale.unit = unit == 0 ? 1 : unit;
  return scale;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dictionary

Dictionary Dictionary::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open dictionary file: " + file.string());

  Dictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = chomp(line);
    if (trimmed.empty()) continue;

    const std::size_t tab = trimmed.rfind('\t');
    if (tab == std::string_view::npos) {
      throw ParseError(location(file, line_no) + ": expected 'label<TAB>id'");
    }
    const std::string_view label = trimmed.substr(0, tab);
    const std::int64_t id = parse_int64(trimmed.substr(tab + 1), file, line_no);
    if (id < 0 || id > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError(location(file, line_no) + ": id out of range");
    }
    dict.add(std::string(label), static_cast<std::uint32_t>(id));
  }
  dict.finalize(file.string());
  return dict;
}

void Dictionary::add(std::string label, std::uint32_t id) {
  if (id >= labels_.size()) {
    labels_.resize(id + 1);
    present_.resize(id + 1, false);
  }
  if (present_[id]) {
    throw ParseError("duplicate id " + std::to_string(id) + " in dictionary");
  }
  if (!ids_.emplace(label, id).second) {
    throw ParseError("duplicate label '" + label + "' in dictionary");
  }
  labels_[id] = std::move(label);
  present_[id] = true;
}

void Dictionary::finalize(std::string_view origin) {
  for (std::size_t id = 0; id < present_.size(); ++id) {
    if (!present_[id]) {
      throw ParseError(std::string(origin) + ": ids not dense, missing id " +
                       std::to_string(id));
    }
  }
}

std::optional<std::uint32_t> Dictionary::find(std::string_view label) const {
  const auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Dictionary::label(std::uint32_t id) const {
  if (id >= labels_.size()) {
    throw ReferenceError("dictionary id " + std::to_string(id) + " out of range [0, " +
                         std::to_string(labels_.size()) + ")");
  }
  return labels_[id];
}

// ---------------------------------------------------------------------------
// Free functions

RelationId inverse_relation(RelationId r, std::uint32_t num_relations) {
  if (r >= 2 * num_relations) {
    throw ReferenceError("relation id " + std::to_string(r) + " out of range [0, " +
                         std::to_string(2 * num_relations) + ")");
  }
  return r < num_relations ? r + num_relations : r - num_relations;
}

std::vector<Quadruple> parse_quadruple_file(const std::filesystem::path& path,
                                            const Dictionary& entity_dict,
                                            const Dictionary& relation_dict,
                                            const TimeScale& scale) {
  RawSplit raw = parse_raw_quadruples(path, entity_dict, relation_dict);
  for (Quadruple& q : raw.facts) q.timestamp = scale.normalize(q.timestamp);
  return std::move(raw.facts);
}

void write_quadruple_file(const std::filesystem::path& path,
                          std::span<const Quadruple> facts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  for (const Quadruple& q : facts) {
    out << q.subject << '\t' << q.relation << '\t' << q.object << '\t' << q.timestamp
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// TemporalKG

TemporalKG TemporalKG::load(const std::filesystem::path& dir) {
  for (const char* name :
       {"entity2id.txt", "relation2id.txt", "train.txt", "valid.txt", "test.txt"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw Error("dataset directory " + dir.string() + " is missing " + name);
    }
  }

  Dictionary entities = Dictionary::load(dir / "entity2id.txt");
  Dictionary relations = Dictionary::load(dir / "relation2id.txt");

  std::array<RawSplit, 3> raw = {
      parse_raw_quadruples(dir / "train.txt", entities, relations),
      parse_raw_quadruples(dir / "valid.txt", entities, relations),
      parse_raw_quadruples(dir / "test.txt", entities, relations),
  };
  const TimeScale scale = infer_time_scale(raw);
  for (RawSplit& split : raw) {
    for (Quadruple& q : split.facts) q.timestamp = scale.normalize(q.timestamp);
  }

  return from_parts(std::move(entities), std::move(relations), std::move(raw[0].facts),
                    std::move(raw[1].facts), std::move(raw[2].facts), scale);
}

TemporalKG TemporalKG::from_parts(Dictionary entities, Dictionary relations,
                                  std::vector<Quadruple> train,
                                  std::vector<Quadruple> valid,
                                  std::vector<Quadruple> test, TimeScale scale) {
  const auto minmax_ts = [](const std::vector<Quadruple>& facts) {
    std::pair<Timestamp, Timestamp> range{0, 0};
    bool first = true;
    for (const Quadruple& q : facts) {
      if (first || q.timestamp < range.first) range.first = q.timestamp;
      if (first || q.timestamp > range.second) range.second = q.timestamp;
      first = false;
    }
    return range;
  };
  if (!train.empty() && !valid.empty() &&
      minmax_ts(train).second > minmax_ts(valid).first) {
    throw Error("split timestamps overlap: max(train) > min(valid)");
  }
  if (!valid.empty() && !test.empty() &&
      minmax_ts(valid).second > minmax_ts(test).first) {
    throw Error("split timestamps overlap: max(valid) > min(test)");
  }
  if (!train.empty() && !test.empty() &&
      minmax_ts(train).second > minmax_ts(test).first) {
    throw Error("split timestamps overlap: max(train) > min(test)");
  }

  TemporalKG kg;
  kg.entities_ = std::move(entities);
  kg.relations_ = std::move(relations);
  kg.scale_ = scale;
  kg.train_count_ = train.size();
  kg.valid_count_ = valid.size();
  kg.test_count_ = test.size();

  kg.facts_.reserve(train.size() + valid.size() + test.size());
  kg.facts_.insert(kg.facts_.end(), train.begin(), train.end());
  kg.facts_.insert(kg.facts_.end(), valid.begin(), valid.end());
  kg.facts_.insert(kg.facts_.end(), test.begin(), test.end());

  // Stable sort keeps file order inside a timestamp and keeps the three
  // splits contiguous when boundary timestamps coincide.
  std::stable_sort(kg.facts_.begin(), kg.facts_.end(),
                   [](const Quadruple& a, const Quadruple& b) {
                     return a.timestamp < b.timestamp;
                   });

  for (const Quadruple& q : kg.facts_) {
    if (!kg.entities_.contains(q.subject) || !kg.entities_.contains(q.object)) {
      throw ReferenceError("fact references entity id outside the dictionary");
    }
    if (q.relation >= kg.num_base_relations()) {
      throw ReferenceError("fact references relation id outside the dictionary");
    }
    if (q.timestamp < 0) throw Error("negative timestamp after normalization");
  }

  kg.build_indexes();
  return kg;
}

void TemporalKG::build_indexes() {
  by_subject_.assign(entities_.size(), {});
  by_object_.assign(entities_.size(), {});
  by_subject_relation_.clear();
  by_object_relation_.clear();

  for (std::uint32_t pos = 0; pos < facts_.size(); ++pos) {
    const Quadruple& q = facts_[pos];
    by_subject_[q.subject].push_back(pos);
    by_object_[q.object].push_back(pos);
    by_subject_relation_[pair_key(q.subject, q.relation)].push_back(pos);
    by_object_relation_[pair_key(q.object, q.relation)].push_back(pos);
  }
}

std::span<const Quadruple> TemporalKG::train_facts() const {
  return std::span<const Quadruple>(facts_).subspan(0, train_count_);
}

std::span<const Quadruple> TemporalKG::valid_facts() const {
  return std::span<const Quadruple>(facts_).subspan(train_count_, valid_count_);
}

std::span<const Quadruple> TemporalKG::test_facts() const {
  return std::span<const Quadruple>(facts_).subspan(train_count_ + valid_count_,
                                                    test_count_);
}

DatasetStats TemporalKG::stats() const {
  DatasetStats s;
  s.entities = entities_.size();
  s.relations = relations_.size();
  s.train = train_count_;
  s.valid = valid_count_;
  s.test = test_count_;
  std::set<Timestamp> distinct;
  for (const Quadruple& q : facts_) distinct.insert(q.timestamp);
  s.num_timestamps = distinct.size();
  s.interval_raw_units = scale_.unit;
  return s;
}

std::span<const std::uint32_t> TemporalKG::subject_index(EntityId s) const {
  if (s >= by_subject_.size()) return {};
  return by_subject_[s];
}

std::span<const std::uint32_t> TemporalKG::object_index(EntityId o) const {
  if (o >= by_object_.size()) return {};
  return by_object_[o];
}

std::span<const std::uint32_t> TemporalKG::subject_relation_index(EntityId s,
                                                                  RelationId r) const {
  const auto it = by_subject_relation_.find(pair_key(s, r));
  if (it == by_subject_relation_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> TemporalKG::object_relation_index(EntityId o,
                                                                 RelationId r) const {
  const auto it = by_object_relation_.find(pair_key(o, r));
  if (it == by_object_relation_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> facts_before(const TemporalKG& kg, Timestamp t,
                                            SlotPosition position, EntityId entity,
                                            std::optional<RelationId> relation) {
  std::span<const std::uint32_t> postings;
  if (position == SlotPosition::subject) {
    postings = relation ? kg.subject_relation_index(entity, *relation)
                        : kg.subject_index(entity);
  } else {
    postings = relation ? kg.object_relation_index(entity, *relation)
                        : kg.object_index(entity);
  }
  // Positions ascend and the global order is chronological, so the
  // timestamps along a posting list are non-decreasing.
  const auto end = std::partition_point(
      postings.begin(), postings.end(),
      [&](std::uint32_t pos) { return kg.fact(pos).timestamp < t; });
  return postings.subspan(0, static_cast<std::size_t>(end - postings.begin()));
}

}  // namespace tkgf
