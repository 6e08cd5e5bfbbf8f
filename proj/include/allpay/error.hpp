#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace allpay {

enum class ErrorCode {
  kInvalidParameter,
  kCyclicGraph,
  kDanglingTerminalEdge,
  kDeadEndVertex,
  kUnreachableTerminal,
  kUnknownVertex,
  kTerminalVertex,
  kNoLegalMove,
  kMissingValue,
  kInvalidLength,
  kDimensionMismatch,
  kBreakdown,
  kSingular,
  kDegenerateChips,
  kInvalidStrategy,
  kGraphTooLarge,
  kFormatMismatch,
  kGraphHashMismatch,
  kTooLarge,
  kIoError,
};

std::string_view error_name(ErrorCode code);

// Every domain failure in the library is reported through this type; the CLI
// turns it into a JSON error object and the HTTP layer into a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace allpay
