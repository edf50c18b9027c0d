#include "noseheat/error.hpp"

namespace noseheat {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::OutOfRangeTemp: return "OutOfRangeTemp";
    case ErrorCode::InvalidSequence: return "InvalidSequence";
    case ErrorCode::SeedOutOfBounds: return "SeedOutOfBounds";
    case ErrorCode::EmptyRoi: return "EmptyRoi";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::AllOutliers: return "AllOutliers";
    case ErrorCode::RateTooLow: return "RateTooLow";
    case ErrorCode::ConstantSignal: return "ConstantSignal";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace noseheat
