#pragma once

#include <stdexcept>
#include <string>

namespace tkgf {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (wrong arity, non-integer field, bad dictionary
/// line). The message carries file and line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An id that cannot be resolved in its dictionary.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A prompt was requested for a query with no retrievable history.
/// Callers usually record a no-prediction outcome instead of failing.
class EmptyHistoryError : public Error {
 public:
  using Error::Error;
};

/// Transport-level backend failure that persisted through all retries.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

/// The backend answered but cannot provide what decoding needs
/// (e.g. a completion endpoint that returns no token logprobs).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A report or config document does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkgf
