#include "allpay/error.hpp"

namespace allpay {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kCyclicGraph: return "CyclicGraph";
    case ErrorCode::kDanglingTerminalEdge: return "DanglingTerminalEdge";
    case ErrorCode::kDeadEndVertex: return "DeadEndVertex";
    case ErrorCode::kUnreachableTerminal: return "UnreachableTerminal";
    case ErrorCode::kUnknownVertex: return "UnknownVertex";
    case ErrorCode::kTerminalVertex: return "TerminalVertex";
    case ErrorCode::kNoLegalMove: return "NoLegalMove";
    case ErrorCode::kMissingValue: return "MissingValue";
    case ErrorCode::kInvalidLength: return "InvalidLength";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBreakdown: return "Breakdown";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kDegenerateChips: return "DegenerateChips";
    case ErrorCode::kInvalidStrategy: return "InvalidStrategy";
    case ErrorCode::kGraphTooLarge: return "GraphTooLarge";
    case ErrorCode::kFormatMismatch: return "FormatMismatch";
    case ErrorCode::kGraphHashMismatch: return "GraphHashMismatch";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace allpay
