#ifndef TABML_EXPLAIN_COUNTERFACTUAL_HPP_
#define TABML_EXPLAIN_COUNTERFACTUAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/explain/model_function.hpp"

namespace tabml::explain {

struct CounterfactualOptions {
  std::size_t max_changed_features = 3;
  std::size_t grid_points = 50;
};

struct Counterfactual {
  Vector instance;
  std::size_t original_class = 0;
  std::size_t desired_class = 0;
  bool found = false;
  Vector counterfactual;  // empty when not found
  std::vector<std::size_t> changed_features;
  double distance = 0.0;  // L1 over feature ranges
};

// Grid search over [lower_j, upper_j]. Every single-feature change is tried
// first and the flip with the smallest normalized L1 distance wins. Without a
// single-feature flip the change raising the desired class probability most is
// kept and the search continues on the remaining features, up to
// max_changed_features.
Counterfactual FindCounterfactual(const ProbaFunction& proba, std::span<const double> instance,
                                  std::size_t desired_class, std::span<const double> lower,
                                  std::span<const double> upper,
                                  const CounterfactualOptions& options = {});

nlohmann::json ToJson(const Counterfactual& cf);

}  // namespace tabml::explain

#endif  // TABML_EXPLAIN_COUNTERFACTUAL_HPP_
