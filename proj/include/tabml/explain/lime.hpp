#ifndef TABML_EXPLAIN_LIME_HPP_
#define TABML_EXPLAIN_LIME_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/explain/model_function.hpp"

namespace tabml::explain {

struct LimeOptions {
  std::size_t n_samples = 1000;
  double ridge = 1e-3;
  std::uint64_t seed = 0;
};

struct LimeExplanation {
  Vector instance;
  Vector coefficients;  // surrogate slope per feature
  double intercept = 0.0;
  std::optional<double> fidelity;  // weighted R^2; empty when degenerate
  bool degenerate = false;         // model output constant over the samples
  double kernel_width = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Local weighted ridge surrogate. Samples are instance + scale * N(0, 1) per
// feature, weighted by exp(-d^2 / width^2) with d measured in scale units and
// width = 0.75 sqrt(p).
LimeExplanation Lime(const ModelFunction& f, std::span<const double> instance,
                     std::span<const double> scale, const LimeOptions& options = {});

// Population standard deviation per column.
Vector ColumnStd(const Matrix& x);

nlohmann::json ToJson(const LimeExplanation& lime);

}  // namespace tabml::explain

#endif  // TABML_EXPLAIN_LIME_HPP_
