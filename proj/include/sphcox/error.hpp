#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sphcox {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kNumerical,
  kOverflow,
  kMissingData,
  kUnsupported,
  kInsufficientSimulations,
  kParse,
  kIo,
};

// Stable machine-readable names, printed by the CLI on failure.
constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kNumerical: return "numerical_breakdown";
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kMissingData: return "missing_data";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kInsufficientSimulations: return "insufficient_simulations";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace sphcox
