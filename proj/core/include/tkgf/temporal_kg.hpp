#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkgf/errors.hpp"
#include "tkgf/types.hpp"

namespace tkgf {

/// Bijective label <-> id mapping with ids dense in [0, n).
class Dictionary {
 public:
  Dictionary() = default;

  /// Reads a "label<TAB>id" file. Throws ParseError on malformed lines,
  /// duplicate labels/ids, or ids that are not dense in [0, n).
  static Dictionary load(const std::filesystem::path& file);

  /// Registers one (label, id) pair. Ids may arrive in any order;
  /// density is enforced by finalize().
  void add(std::string label, std::uint32_t id);

  /// Checks the bijection and id density. Throws ParseError otherwise.
  void finalize(std::string_view origin = "dictionary");

  std::uint32_t size() const { return static_cast<std::uint32_t>(labels_.size()); }
  bool contains(std::uint32_t id) const { return id < size(); }

  std::optional<std::uint32_t> find(std::string_view label) const;

  /// Throws ReferenceError for out-of-range ids.
  const std::string& label(std::uint32_t id) const;

 private:
  std::vector<std::string> labels_;
  std::vector<bool> present_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Inverse-relation id arithmetic: r < |R| maps to r + |R| and back.
/// Throws ReferenceError for r >= 2*|R|.
RelationId inverse_relation(RelationId r, std::uint32_t num_relations);

/// Parses a line-oriented tab-separated quadruple file
/// (subject-id, relation-id, object-id, timestamp, optional ignored
/// trailing columns). Ids are validated against the dictionaries;
/// timestamps are normalized through `scale`. File order is preserved.
std::vector<Quadruple> parse_quadruple_file(const std::filesystem::path& path,
                                            const Dictionary& entity_dict,
                                            const Dictionary& relation_dict,
                                            const TimeScale& scale = {});

/// Writes facts in the same tab-separated layout parse_quadruple_file reads.
void write_quadruple_file(const std::filesystem::path& path,
                          std::span<const Quadruple> facts);

struct DatasetStats {
  std::uint64_t entities = 0;
  std::uint64_t relations = 0;
  std::uint64_t train = 0;
  std::uint64_t valid = 0;
  std::uint64_t test = 0;
  std::uint64_t num_timestamps = 0;
  std::int64_t interval_raw_units = 1;
};

/// Immutable, fully indexed temporal knowledge graph with
/// train/valid/test splits in one chronologically sorted fact list.
///
/// Facts are sorted by (timestamp, file order) with splits concatenated
/// train, valid, test; since splits are time-monotone the three splits
/// occupy contiguous ranges of the global order. All secondary indexes
/// store positions into facts() in ascending (hence chronological) order.
///
/// Immutable after load; concurrent readers need no synchronization.
class TemporalKG {
 public:
  /// Loads a dataset directory: train.txt, valid.txt, test.txt,
  /// entity2id.txt, relation2id.txt. Raw timestamps are normalized to
  /// step indices (see TimeScale). Throws ParseError / ReferenceError /
  /// Error on malformed or inconsistent inputs.
  static TemporalKG load(const std::filesystem::path& dir);

  /// Assembles a graph from in-memory parts (timestamps already in
  /// step units). Same validation and indexing as load().
  static TemporalKG from_parts(Dictionary entities, Dictionary relations,
                               std::vector<Quadruple> train,
                               std::vector<Quadruple> valid,
                               std::vector<Quadruple> test,
                               TimeScale scale = {});

  const Dictionary& entities() const { return entities_; }
  const Dictionary& relations() const { return relations_; }
  std::uint32_t num_base_relations() const { return relations_.size(); }

  std::span<const Quadruple> facts() const { return facts_; }
  const Quadruple& fact(std::uint32_t position) const { return facts_[position]; }

  std::span<const Quadruple> train_facts() const;
  std::span<const Quadruple> valid_facts() const;
  std::span<const Quadruple> test_facts() const;

  /// Position of the first test fact in facts(); everything below is
  /// train + valid background history.
  std::size_t background_end() const { return train_count_ + valid_count_; }

  TimeScale time_scale() const { return scale_; }
  DatasetStats stats() const;

  RelationId inverse(RelationId r) const {
    return inverse_relation(r, num_base_relations());
  }

  /// Positions of facts with the given subject, ascending.
  std::span<const std::uint32_t> subject_index(EntityId s) const;
  /// Positions of facts with the given (subject, relation), ascending.
  std::span<const std::uint32_t> subject_relation_index(EntityId s, RelationId r) const;
  std::span<const std::uint32_t> object_index(EntityId o) const;
  std::span<const std::uint32_t> object_relation_index(EntityId o, RelationId r) const;

 private:
  TemporalKG() = default;

  void build_indexes();

  Dictionary entities_;
  Dictionary relations_;
  std::vector<Quadruple> facts_;
  std::size_t train_count_ = 0;
  std::size_t valid_count_ = 0;
  std::size_t test_count_ = 0;
  TimeScale scale_;

  // Dense per-entity postings plus hashed (entity, relation) postings.
  std::vector<std::vector<std::uint32_t>> by_subject_;
  std::vector<std::vector<std::uint32_t>> by_object_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_subject_relation_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_object_relation_;
};

/// Which slot of a fact an index key addresses.
enum class SlotPosition { subject, object };

/// All facts matching the key with timestamp strictly below `t`,
/// as ascending positions into kg.facts(). Empty result allowed.
std::span<const std::uint32_t> facts_before(const TemporalKG& kg, Timestamp t,
                                            SlotPosition position, EntityId entity,
                                            std::optional<RelationId> relation = std::nullopt);

}  // namespace tkgf
