#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crisp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes or invalid model/pathway parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A call whose arguments violate the operation's preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the byte offset where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Pearson correlation requested on a constant vector.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message names the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Stored content does not match its recorded hash.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace crisp
