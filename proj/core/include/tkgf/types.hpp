#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tkgf {

/// Dense index into the entity dictionary.
using EntityId = std::uint32_t;

/// Dense index into the relation dictionary. Ids in [0, |R|) are the
/// relations as stored on disk; ids in [|R|, 2*|R|) denote the inverse
/// reading of the corresponding base relation.
using RelationId = std::uint32_t;

/// Normalized time step. One step corresponds to one dataset interval
/// (a day for event data, a year for duration-derived benchmarks).
using Timestamp = std::int64_t;

/// One timestamped fact (subject, relation, object, timestamp).
struct Quadruple {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;
  Timestamp timestamp = 0;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

/// Maps raw file timestamps onto normalized steps.
///
/// Some benchmark files encode coarse intervals in finer raw units
/// (e.g. day-granular event data with hour-valued timestamps 0, 24, 48,
/// ...). `unit` is the inferred raw width of one step; timestamps that
/// are already step-granular keep their values.
struct TimeScale {
  std::int64_t raw_min = 0;
  std::int64_t unit = 1;

  Timestamp normalize(std::int64_t raw) const {
    return raw_min / unit + (raw - raw_min) / unit;
  }
};

}  // namespace tkgf
