#include "tabml/preprocess/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tabml/core/error.hpp"

namespace tabml::preprocess {
namespace {

constexpr std::size_t kMaxReferenceQuantiles = 1000;

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double PopulationStd(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Position of `x` on [0, 1] relative to the sorted references. Tied reference
// values map to the midpoint of their index range.
double EmpiricalCdf(std::span<const double> refs, double x) {
  const std::size_t n = refs.size();
  if (n == 1) return 0.5;
  if (x <= refs.front()) {
    if (x < refs.front()) return 0.0;
  }
  if (x >= refs.back()) {
    if (x > refs.back()) return 1.0;
  }
  auto lo = std::lower_bound(refs.begin(), refs.end(), x);
  auto hi = std::upper_bound(refs.begin(), refs.end(), x);
  const double denom = static_cast<double>(n - 1);
  if (lo != hi) {
    const double first = static_cast<double>(lo - refs.begin());
    const double last = static_cast<double>(hi - refs.begin() - 1);
    return 0.5 * (first + last) / denom;
  }
  const std::size_t i = static_cast<std::size_t>(lo - refs.begin());
  const double a = refs[i - 1];
  const double b = refs[i];
  const double frac = (x - a) / (b - a);
  return (static_cast<double>(i - 1) + frac) / denom;
}

}  // namespace

std::string_view ScalerMethodName(ScalerMethod method) {
  switch (method) {
    case ScalerMethod::kUnitNorm: return "unit_norm";
    case ScalerMethod::kRobust: return "robust";
    case ScalerMethod::kStandard: return "standard";
    case ScalerMethod::kPower: return "power";
    case ScalerMethod::kQuantile: return "quantile";
  }
  return "standard";
}

std::optional<ScalerMethod> ParseScalerMethod(std::string_view name) {
  for (auto m : {ScalerMethod::kUnitNorm, ScalerMethod::kRobust, ScalerMethod::kStandard,
                 ScalerMethod::kPower, ScalerMethod::kQuantile}) {
    if (ScalerMethodName(m) == name) return m;
  }
  return std::nullopt;
}

double QuantileSorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double YeoJohnson(double x, double lambda) {
  constexpr double kEps = 1e-12;
  if (x >= 0.0) {
    if (std::abs(lambda) < kEps) return std::log1p(x);
    return (std::pow(x + 1.0, lambda) - 1.0) / lambda;
  }
  if (std::abs(lambda - 2.0) < kEps) return -std::log1p(-x);
  return -(std::pow(1.0 - x, 2.0 - lambda) - 1.0) / (2.0 - lambda);
}

double YeoJohnsonLogLikelihood(std::span<const double> values, double lambda) {
  const double n = static_cast<double>(values.size());
  std::vector<double> t(values.size());
  double log_jacobian = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    t[i] = YeoJohnson(values[i], lambda);
    log_jacobian += std::copysign(std::log1p(std::abs(values[i])), values[i]);
  }
  const double mean = Mean(t);
  double var = 0.0;
  for (double v : t) var += (v - mean) * (v - mean);
  var /= n;
  if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
  return -0.5 * n * std::log(var) + (lambda - 1.0) * log_jacobian;
}

double FitYeoJohnsonLambda(std::span<const double> values) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -5.0;
  double b = 5.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = YeoJohnsonLogLikelihood(values, c);
  double fd = YeoJohnsonLogLikelihood(values, d);
  while (b - a > 1e-4) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = YeoJohnsonLogLikelihood(values, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = YeoJohnsonLogLikelihood(values, d);
    }
  }
  return 0.5 * (a + b);
}

ScalerParams FitScaler(const Matrix& x, ScalerMethod method, std::span<const std::size_t> columns) {
  Require(x.rows() > 0 && x.cols() > 0, ErrorCode::kEmptyMatrix, "cannot fit a scaler on no data");
  ScalerParams params;
  params.method = method;
  params.features.resize(x.cols());
  if (!columns.empty()) {
    for (auto& f : params.features) f.active = false;
    for (std::size_t c : columns) {
      Require(c < x.cols(), ErrorCode::kDimensionMismatch, "scaler column out of range");
      params.features[c].active = true;
    }
  }
  if (method == ScalerMethod::kUnitNorm) return params;  // row-wise, nothing to fit

  for (std::size_t c = 0; c < x.cols(); ++c) {
    FeatureStats& f = params.features[c];
    if (!f.active) continue;
    Vector col = x.column(c);
    Vector sorted = col;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
      f.identity = true;
      continue;
    }
    switch (method) {
      case ScalerMethod::kStandard:
        f.mean = Mean(col);
        f.std = PopulationStd(col, f.mean);
        f.identity = !(f.std > 0.0);
        break;
      case ScalerMethod::kRobust:
        f.median = QuantileSorted(sorted, 0.5);
        f.iqr = QuantileSorted(sorted, 0.75) - QuantileSorted(sorted, 0.25);
        f.identity = !(f.iqr > 0.0);
        break;
      case ScalerMethod::kPower: {
        f.lambda = FitYeoJohnsonLambda(col);
        Vector t(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) t[i] = YeoJohnson(col[i], f.lambda);
        f.mean = Mean(t);
        f.std = PopulationStd(t, f.mean);
        f.identity = !(f.std > 0.0);
        break;
      }
      case ScalerMethod::kQuantile:
        if (sorted.size() <= kMaxReferenceQuantiles) {
          f.references = sorted;
        } else {
          f.references.resize(kMaxReferenceQuantiles);
          for (std::size_t q = 0; q < kMaxReferenceQuantiles; ++q) {
            f.references[q] = QuantileSorted(
                sorted, static_cast<double>(q) / static_cast<double>(kMaxReferenceQuantiles - 1));
          }
        }
        break;
      case ScalerMethod::kUnitNorm:
        break;
    }
  }
  return params;
}

Matrix Transform(const Matrix& x, const ScalerParams& params) {
  Require(x.cols() == params.num_features(), ErrorCode::kDimensionMismatch,
          "scaler fitted on " + std::to_string(params.num_features()) + " features, got " +
              std::to_string(x.cols()));
  Matrix out = x;
  if (params.method == ScalerMethod::kUnitNorm) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      double sq = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (params.features[c].active) sq += row[c] * row[c];
      }
      if (sq == 0.0) continue;
      const double norm = std::sqrt(sq);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (params.features[c].active) row[c] /= norm;
      }
    }
    return out;
  }
  for (std::size_t c = 0; c < out.cols(); ++c) {
    const FeatureStats& f = params.features[c];
    if (!f.active || f.identity) continue;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      double& v = out(r, c);
      switch (params.method) {
        case ScalerMethod::kStandard: v = (v - f.mean) / f.std; break;
        case ScalerMethod::kRobust: v = (v - f.median) / f.iqr; break;
        case ScalerMethod::kPower: v = (YeoJohnson(v, f.lambda) - f.mean) / f.std; break;
        case ScalerMethod::kQuantile: v = EmpiricalCdf(f.references, v); break;
        case ScalerMethod::kUnitNorm: break;
      }
    }
  }
  return out;
}

nlohmann::json ToJson(const ScalerParams& params) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : params.features) {
    nlohmann::json j = {{"active", f.active}, {"identity", f.identity}};
    if (f.active && !f.identity) {
      switch (params.method) {
        case ScalerMethod::kStandard: j["mean"] = f.mean; j["std"] = f.std; break;
        case ScalerMethod::kRobust: j["median"] = f.median; j["iqr"] = f.iqr; break;
        case ScalerMethod::kPower:
          j["lambda"] = f.lambda; j["mean"] = f.mean; j["std"] = f.std;
          break;
        case ScalerMethod::kQuantile: j["n_references"] = f.references.size(); break;
        case ScalerMethod::kUnitNorm: break;
      }
    }
    features.push_back(std::move(j));
  }
  return {{"method", ScalerMethodName(params.method)}, {"features", features}};
}

}  // namespace tabml::preprocess
