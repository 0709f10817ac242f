#include "tabml/core/error.hpp"

namespace tabml {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kAllRowsDropped: return "AllRowsDropped";
    case ErrorCode::kTargetNotFound: return "TargetNotFound";
    case ErrorCode::kTaskKindMismatch: return "TaskKindMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kMinorityTooSmall: return "MinorityTooSmall";
    case ErrorCode::kUnknownAlgorithmName: return "UnknownAlgorithmName";
    case ErrorCode::kInvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::kDegenerateTarget: return "DegenerateTarget";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kKExceedsRows: return "KExceedsRows";
    case ErrorCode::kComponentCountTooLarge: return "ComponentCountTooLarge";
    case ErrorCode::kNonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kFeatureOutOfRange: return "FeatureOutOfRange";
    case ErrorCode::kTooManyFeaturesForExact: return "TooManyFeaturesForExact";
    case ErrorCode::kAlreadyDesiredClass: return "AlreadyDesiredClass";
    case ErrorCode::kNotAClassifier: return "NotAClassifier";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kInsufficientRowsForFolds: return "InsufficientRowsForFolds";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIncompatibleSeries: return "IncompatibleSeries";
    case ErrorCode::kTimedOut: return "TimedOut";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kIllegalTransition: return "IllegalTransition";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace tabml
