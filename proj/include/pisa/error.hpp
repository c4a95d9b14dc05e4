#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pisa {

enum class ErrorKind {
  ShapeMismatch,
  NotReset,
  ModeError,
  WeightsUnprogrammed,
  AddressOutOfRange,
  InvalidCount,
  RowPairInvalid,
  CapacityExceeded,
  MissingCost,
  WorkloadMismatch,
  FormatError,
  IoError,
  ConfigError,
  InvariantViolation,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every recoverable simulator failure. The kind is
/// stable and is what tests and the CLI dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure inside a binary or text file. `offset` is the byte
/// position at which the input stopped making sense.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& what);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace pisa
