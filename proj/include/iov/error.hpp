#pragma once

#include <stdexcept>
#include <string>

namespace iov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument supplied by the caller (negative power, zero identity, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A date or period outside the configured time tree.
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace iov
