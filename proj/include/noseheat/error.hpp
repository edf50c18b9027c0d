#pragma once

#include <stdexcept>
#include <string>

namespace noseheat {

// Every failure the library reports carries exactly one of these codes.
enum class ErrorCode {
  InvalidArgument,
  IoFailure,
  BadMagic,
  DimensionMismatch,
  NonMonotonicTime,
  OutOfRangeTemp,
  InvalidSequence,
  SeedOutOfBounds,
  EmptyRoi,
  EmptySequence,
  LengthMismatch,
  TooShort,
  AllOutliers,
  RateTooLow,
  ConstantSignal,
  ConstantSeries,
  ZeroVariance,
  IncompleteTable,
  DegenerateVariance,
  InvalidSpec,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace noseheat
