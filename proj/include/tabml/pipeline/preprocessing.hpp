#ifndef TABML_PIPELINE_PREPROCESSING_HPP_
#define TABML_PIPELINE_PREPROCESSING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/data/schema.hpp"
#include "tabml/preprocess/sampler.hpp"
#include "tabml/preprocess/scaler.hpp"

namespace tabml::pipeline {

enum class OversampleChoice { kAuto, kNone, kRandom, kSmote };

std::string_view OversampleChoiceName(OversampleChoice choice);
std::optional<OversampleChoice> ParseOversampleChoice(std::string_view name);

struct PreprocessOptions {
  // Applied to continuous features only; empty means no scaling.
  std::optional<preprocess::ScalerMethod> scaler = preprocess::ScalerMethod::kStandard;
  OversampleChoice oversample = OversampleChoice::kAuto;
};

// Preprocessing fitted on one training portion.
struct FittedPreprocessing {
  std::optional<preprocess::ScalerParams> scaler;
  std::optional<preprocess::SamplerSpec> sampler;
  std::vector<std::string> notes;

  Matrix Apply(const Matrix& x) const;
};

nlohmann::json ToJson(const FittedPreprocessing& fitted);

struct PreparedTraining {
  Matrix x;
  Vector y;
  FittedPreprocessing fitted;
};

// Fits the scaler on `x`, transforms it, then oversamples (classification
// only). Validation or test rows go through fitted.Apply without resampling.
PreparedTraining PrepareTraining(const PreprocessOptions& options, const Matrix& x,
                                 std::span<const double> y,
                                 std::span<const data::FeatureOrigin> origins, data::Task task,
                                 std::uint64_t seed);

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_PREPROCESSING_HPP_
