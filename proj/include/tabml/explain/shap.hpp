#ifndef TABML_EXPLAIN_SHAP_HPP_
#define TABML_EXPLAIN_SHAP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/explain/model_function.hpp"

namespace tabml::explain {

inline constexpr std::size_t kMaxExactShapFeatures = 12;
inline constexpr std::size_t kKernelShapSamples = 2048;

enum class ShapMode { kExact, kSampled };
std::string_view ShapModeName(ShapMode mode);

struct ShapValues {
  ShapMode mode = ShapMode::kExact;
  Vector instance;
  Vector values;          // one attribution per feature
  double baseline = 0.0;  // mean output over the background
  double output = 0.0;    // output on the instance
  std::size_t coalitions = 0;
  std::uint64_t seed = 0;
};

// Interventional Shapley values: absent features take background values and
// coalition worth is the mean output over background rows. Exact mode
// enumerates all coalitions; sampled mode fits the kernel-weighted linear
// model on kKernelShapSamples coalitions drawn from the Shapley kernel, with
// the attributions constrained to sum to output - baseline.
ShapValues Shap(const ModelFunction& f, std::span<const double> instance,
                const Matrix& background, ShapMode mode, std::uint64_t seed = 0);

nlohmann::json ToJson(const ShapValues& shap);

}  // namespace tabml::explain

#endif  // TABML_EXPLAIN_SHAP_HPP_
