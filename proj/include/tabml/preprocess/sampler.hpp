#ifndef TABML_PREPROCESS_SAMPLER_HPP_
#define TABML_PREPROCESS_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"

namespace tabml::preprocess {

enum class SamplerMethod { kRandom, kSmote };

std::string_view SamplerMethodName(SamplerMethod method);
std::optional<SamplerMethod> ParseSamplerMethod(std::string_view name);

struct SamplerSpec {
  SamplerMethod method = SamplerMethod::kSmote;
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

struct Resampled {
  Matrix x;
  Vector y;
  // Number of leading rows copied verbatim from the input.
  std::size_t original_rows = 0;
};

// Raises every class to the majority count. Synthetic rows are appended after
// the originals, class by class in ascending label order.
Resampled Oversample(const Matrix& x, std::span<const double> y, const SamplerSpec& spec);

// Per-class row counts, indexed by class label.
std::vector<std::size_t> ClassCounts(std::span<const double> y);

// Default policy: SMOTE when the majority/minority ratio exceeds 1.5, with
// k = min(5, minority - 1); random oversampling when the minority has one row.
std::optional<SamplerSpec> AutoSampler(std::span<const double> y, std::uint64_t seed);

nlohmann::json ToJson(const SamplerSpec& spec);

}  // namespace tabml::preprocess

#endif  // TABML_PREPROCESS_SAMPLER_HPP_
