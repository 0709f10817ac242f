#ifndef TABML_PREPROCESS_SCALER_HPP_
#define TABML_PREPROCESS_SCALER_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"

namespace tabml::preprocess {

enum class ScalerMethod { kUnitNorm, kRobust, kStandard, kPower, kQuantile };

std::string_view ScalerMethodName(ScalerMethod method);
std::optional<ScalerMethod> ParseScalerMethod(std::string_view name);

// Per-feature statistics. Only the fields relevant to `method` are filled.
struct FeatureStats {
  bool active = true;    // false: feature is not part of the scaled set
  bool identity = false; // constant (or zero-spread) feature passes through
  double mean = 0.0;
  double std = 1.0;
  double median = 0.0;
  double iqr = 1.0;
  double lambda = 1.0;             // Yeo-Johnson exponent
  std::vector<double> references;  // sorted reference quantiles
};

struct ScalerParams {
  ScalerMethod method = ScalerMethod::kStandard;
  std::vector<FeatureStats> features;

  std::size_t num_features() const { return features.size(); }
};

nlohmann::json ToJson(const ScalerParams& params);

// Fits `method` on the columns listed in `columns` (all columns when empty);
// the others are marked inactive and pass through transform untouched.
ScalerParams FitScaler(const Matrix& x, ScalerMethod method,
                       std::span<const std::size_t> columns = {});

Matrix Transform(const Matrix& x, const ScalerParams& params);

// Type-7 (linear interpolation) quantile of already sorted values.
double QuantileSorted(std::span<const double> sorted, double q);

// Yeo-Johnson transform of a single value.
double YeoJohnson(double x, double lambda);

// Gaussian profile log-likelihood of the Yeo-Johnson transformed sample.
double YeoJohnsonLogLikelihood(std::span<const double> values, double lambda);

// Golden-section search of the log-likelihood over [-5, 5], tolerance 1e-4.
double FitYeoJohnsonLambda(std::span<const double> values);

}  // namespace tabml::preprocess

#endif  // TABML_PREPROCESS_SCALER_HPP_
