#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowobs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidIdentifier : public Error {
 public:
  using Error::Error;
};

/// A transition was fired in a marking that does not enable it.
class NotEnabled : public Error {
 public:
  using Error::Error;
};

class PathExplosion : public Error {
 public:
  using Error::Error;
};

/// Malformed flow-spec text. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Well-formed text that describes an inconsistent system. `entity` names
/// the offending component, link, flow or event.
class SemanticError : public Error {
 public:
  SemanticError(std::string entity, const std::string& message);

  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class Livelock : public Error {
 public:
  using Error::Error;
};

/// Observations of one instance that no execution path can explain.
class InconsistentTrace : public Error {
 public:
  using Error::Error;
};

/// Problem exceeds an exhaustive-search bound.
class TooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace flowobs
