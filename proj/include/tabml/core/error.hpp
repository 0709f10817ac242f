#ifndef TABML_CORE_ERROR_HPP_
#define TABML_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabml {

// Every failure the library reports carries one of these codes. The service
// maps them onto HTTP statuses and the pipeline tags them with a stage name.
enum class ErrorCode {
  kFileNotFound,
  kMalformedInput,
  kEmptyTable,
  kAllRowsDropped,
  kTargetNotFound,
  kTaskKindMismatch,
  kEmptyMatrix,
  kDimensionMismatch,
  kSingleClass,
  kMinorityTooSmall,
  kUnknownAlgorithmName,
  kInvalidHyperparameter,
  kDegenerateTarget,
  kKTooLarge,
  kKExceedsRows,
  kComponentCountTooLarge,
  kNonPositiveGamma,
  kLengthMismatch,
  kConstantInput,
  kFeatureOutOfRange,
  kTooManyFeaturesForExact,
  kAlreadyDesiredClass,
  kNotAClassifier,
  kTooFewRows,
  kInsufficientRowsForFolds,
  kInvalidConfig,
  kIncompatibleSeries,
  kTimedOut,
  kNotFound,
  kIllegalTransition,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return ErrorCodeName(code_); }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when `condition` is false.
inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace tabml

#endif  // TABML_CORE_ERROR_HPP_
