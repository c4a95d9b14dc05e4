#include "pisa/error.hpp"

namespace pisa {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotReset: return "NotReset";
    case ErrorKind::ModeError: return "ModeError";
    case ErrorKind::WeightsUnprogrammed: return "WeightsUnprogrammed";
    case ErrorKind::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorKind::InvalidCount: return "InvalidCount";
    case ErrorKind::RowPairInvalid: return "RowPairInvalid";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::MissingCost: return "MissingCost";
    case ErrorKind::WorkloadMismatch: return "WorkloadMismatch";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

FormatError::FormatError(std::size_t offset, const std::string& what)
    : Error(ErrorKind::FormatError, what + " (at byte " + std::to_string(offset) + ")"),
      offset_(offset) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace pisa
