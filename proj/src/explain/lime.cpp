#include "tabml/explain/lime.hpp"

#include <algorithm>
#include <cmath>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"

namespace tabml::explain {

Vector ColumnStd(const Matrix& x) {
  Require(x.rows() > 0, ErrorCode::kEmptyMatrix, "std of an empty matrix");
  const Vector mean = ColumnMeans(x);
  Vector out(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(r, c) - mean[c];
      out[c] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(x.rows()));
  return out;
}

LimeExplanation Lime(const ModelFunction& f, std::span<const double> instance,
                     std::span<const double> scale, const LimeOptions& options) {
  const std::size_t p = instance.size();
  Require(p > 0 && scale.size() == p, ErrorCode::kDimensionMismatch,
          "lime scale does not match the instance");
  Require(options.n_samples >= p + 2, ErrorCode::kInvalidHyperparameter,
          "lime needs at least n_features + 2 samples");
  LimeExplanation out;
  out.instance.assign(instance.begin(), instance.end());
  out.n_samples = options.n_samples;
  out.seed = options.seed;
  out.kernel_width = 0.75 * std::sqrt(static_cast<double>(p));

  const std::size_t n = options.n_samples;
  Rng rng(options.seed);
  Matrix samples(n, p);
  Vector weights(n);
  const double width2 = out.kernel_width * out.kernel_width;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double z = rng.normal();
      samples(i, j) = instance[j] + scale[j] * z;
      if (scale[j] > 0.0) d2 += z * z;
    }
    weights[i] = std::exp(-d2 / width2);
  }
  CheckDeadline();
  const Vector y = f(samples);

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) {
    out.degenerate = true;
    out.coefficients.assign(p, 0.0);
    out.intercept = y[0];
    return out;
  }

  // Weighted ridge on deviations from the instance, intercept left unpenalized
  // by centering on the weighted means.
  double wsum = 0.0;
  double ymean = 0.0;
  Vector xmean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    wsum += weights[i];
    ymean += weights[i] * y[i];
    for (std::size_t j = 0; j < p; ++j) xmean[j] += weights[i] * (samples(i, j) - instance[j]);
  }
  ymean /= wsum;
  for (double& v : xmean) v /= wsum;

  Matrix xtx(p, p);
  Vector xty(p, 0.0);
  Vector row(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) row[j] = samples(i, j) - instance[j] - xmean[j];
    const double yc = y[i] - ymean;
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += weights[i] * row[a] * yc;
      for (std::size_t b = 0; b < p; ++b) xtx(a, b) += weights[i] * row[a] * row[b];
    }
  }
  for (std::size_t j = 0; j < p; ++j) xtx(j, j) += options.ridge;
  Vector beta;
  Require(CholeskySolve(xtx, xty, beta), ErrorCode::kInternal, "lime ridge system is singular");

  double intercept_dev = ymean;
  for (std::size_t j = 0; j < p; ++j) intercept_dev -= beta[j] * xmean[j];
  // Surrogate g(x) = intercept + beta . x in raw feature units.
  out.intercept = intercept_dev - Dot(beta, instance);
  out.coefficients = beta;

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = intercept_dev;
    for (std::size_t j = 0; j < p; ++j) pred += beta[j] * (samples(i, j) - instance[j]);
    ss_res += weights[i] * (y[i] - pred) * (y[i] - pred);
    ss_tot += weights[i] * (y[i] - ymean) * (y[i] - ymean);
  }
  out.fidelity = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

nlohmann::json ToJson(const LimeExplanation& lime) {
  nlohmann::json fidelity = nullptr;
  if (lime.fidelity) fidelity = *lime.fidelity;
  return {{"method", "lime"},
          {"instance", lime.instance},
          {"values", lime.coefficients},
          {"intercept", lime.intercept},
          {"fidelity", fidelity},
          {"degenerate", lime.degenerate},
          {"kernel_width", lime.kernel_width},
          {"n_samples", lime.n_samples},
          {"seed", lime.seed}};
}

}  // namespace tabml::explain
