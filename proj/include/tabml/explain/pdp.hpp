#ifndef TABML_EXPLAIN_PDP_HPP_
#define TABML_EXPLAIN_PDP_HPP_

#include <cstddef>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/explain/model_function.hpp"

namespace tabml::explain {

struct PdpCurve {
  std::size_t feature = 0;
  Vector grid;
  Vector values;  // mean model output with the feature forced to each grid value
};

struct PdpSurface {
  std::size_t feature_a = 0;
  std::size_t feature_b = 0;
  Vector grid_a;
  Vector grid_b;
  Matrix values;  // grid_a.size() x grid_b.size()
};

// grid_points evenly spaced values from the feature's min to max over `background`.
Vector FeatureGrid(const Matrix& background, std::size_t feature, std::size_t grid_points);

PdpCurve PartialDependence(const ModelFunction& f, const Matrix& background, std::size_t feature,
                           std::size_t grid_points = 20);

PdpSurface PartialDependence2d(const ModelFunction& f, const Matrix& background,
                               std::size_t feature_a, std::size_t feature_b,
                               std::size_t grid_points = 20);

nlohmann::json ToJson(const PdpCurve& curve);
nlohmann::json ToJson(const PdpSurface& surface);

}  // namespace tabml::explain

#endif  // TABML_EXPLAIN_PDP_HPP_
