#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dynregret {

// Numeric values are part of the C ABI (see dynregret.h); append only.
enum class ErrorCode : int {
  kDimensionMismatch = 1,
  kNotPositiveDefinite = 2,
  kNotSymmetric = 3,
  kNegativeQuadraticForm = 4,
  kInvalidConstants = 5,
  kZetaTooSmall = 6,
  kNoConvergence = 7,
  kDiverged = 8,
  kNotAdmissible = 9,
  kRhoOutOfRange = 10,
  kEmptyHull = 11,
  kConfigInvalid = 12,
  kUnsupportedEnvironment = 13,
  kIoError = 14,
  kParseError = 15,
  kProtocolViolation = 16,
  kInvariantViolated = 17,
  kNonFinite = 18,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dynregret
