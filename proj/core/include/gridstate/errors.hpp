#pragma once

#include <stdexcept>
#include <string>

namespace gridstate {

/// Base class for all gridstate errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (bad CDF layout, missing section terminator, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input with inconsistent content (duplicate bus ids,
/// branches referencing unknown buses, zero-impedance branches, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (empty plan, nonpositive trial count, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The measurement set does not determine the state (rank-deficient gain
/// matrix). The message names the unreachable buses when they are known.
class UnobservableError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridstate
