#pragma once

#include <stdexcept>
#include <string>

namespace medxplain {

/// Input violates an operation's precondition (shape mismatch, bad range, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model server could not produce a usable response, after retries.
/// Malformed payloads are reported through this type as well.
class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration rejected during validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File content could not be parsed (manifest line, record, CSV).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace medxplain
