#include "tabml/explain/pdp.hpp"

#include <algorithm>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"

namespace tabml::explain {

namespace {

void CheckFeature(const Matrix& background, std::size_t feature) {
  Require(background.rows() > 0, ErrorCode::kEmptyMatrix, "partial dependence needs background rows");
  Require(feature < background.cols(), ErrorCode::kFeatureOutOfRange,
          "feature " + std::to_string(feature) + " out of range for " +
              std::to_string(background.cols()) + " features");
}

double MeanOutput(const ModelFunction& f, const Matrix& x) {
  const Vector out = f(x);
  double s = 0.0;
  for (double v : out) s += v;
  return s / static_cast<double>(out.size());
}

}  // namespace

Vector FeatureGrid(const Matrix& background, std::size_t feature, std::size_t grid_points) {
  CheckFeature(background, feature);
  Require(grid_points >= 2, ErrorCode::kInvalidHyperparameter, "grid needs at least 2 points");
  const Vector col = background.column(feature);
  const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
  Vector grid(grid_points);
  const double step = (*hi - *lo) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) grid[i] = *lo + step * static_cast<double>(i);
  grid.back() = *hi;
  return grid;
}

PdpCurve PartialDependence(const ModelFunction& f, const Matrix& background, std::size_t feature,
                           std::size_t grid_points) {
  PdpCurve out;
  out.feature = feature;
  out.grid = FeatureGrid(background, feature, grid_points);
  Matrix x = background;
  for (double v : out.grid) {
    CheckDeadline();
    for (std::size_t r = 0; r < x.rows(); ++r) x(r, feature) = v;
    out.values.push_back(MeanOutput(f, x));
  }
  return out;
}

PdpSurface PartialDependence2d(const ModelFunction& f, const Matrix& background,
                               std::size_t feature_a, std::size_t feature_b,
                               std::size_t grid_points) {
  PdpSurface out;
  out.feature_a = feature_a;
  out.feature_b = feature_b;
  out.grid_a = FeatureGrid(background, feature_a, grid_points);
  out.grid_b = FeatureGrid(background, feature_b, grid_points);
  out.values = Matrix(grid_points, grid_points);
  Matrix x = background;
  for (std::size_t i = 0; i < grid_points; ++i) {
    CheckDeadline();
    for (std::size_t j = 0; j < grid_points; ++j) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        x(r, feature_a) = out.grid_a[i];
        x(r, feature_b) = out.grid_b[j];
      }
      out.values(i, j) = MeanOutput(f, x);
    }
  }
  return out;
}

nlohmann::json ToJson(const PdpCurve& curve) {
  return {{"method", "pdp"}, {"feature", curve.feature}, {"grid", curve.grid}, {"values", curve.values}};
}

nlohmann::json ToJson(const PdpSurface& surface) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < surface.values.rows(); ++i) {
    auto r = surface.values.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  return {{"method", "pdp2d"},
          {"features", {surface.feature_a, surface.feature_b}},
          {"grid_a", surface.grid_a},
          {"grid_b", surface.grid_b},
          {"values", rows}};
}

}  // namespace tabml::explain
