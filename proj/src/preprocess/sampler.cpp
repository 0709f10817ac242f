#include "tabml/preprocess/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"

namespace tabml::preprocess {

std::string_view SamplerMethodName(SamplerMethod method) {
  return method == SamplerMethod::kRandom ? "random" : "smote";
}

std::optional<SamplerMethod> ParseSamplerMethod(std::string_view name) {
  if (name == "random") return SamplerMethod::kRandom;
  if (name == "smote") return SamplerMethod::kSmote;
  return std::nullopt;
}

std::vector<std::size_t> ClassCounts(std::span<const double> y) {
  std::vector<std::size_t> counts;
  for (double v : y) {
    const auto c = static_cast<std::size_t>(v);
    if (c >= counts.size()) counts.resize(c + 1, 0);
    ++counts[c];
  }
  return counts;
}

namespace {

// Indices (into `members`) of the k nearest other members of members[a].
// Distance ties go to the smaller row index.
std::vector<std::size_t> NearestWithin(const Matrix& x, const std::vector<std::size_t>& members,
                                       std::size_t a, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(members.size() - 1);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i == a) continue;
    dist.emplace_back(SquaredDistance(x.row(members[a]), x.row(members[i])), i);
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace

Resampled Oversample(const Matrix& x, std::span<const double> y, const SamplerSpec& spec) {
  Require(x.rows() == y.size(), ErrorCode::kDimensionMismatch, "labels do not match rows");
  const auto counts = ClassCounts(y);
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  Require(present >= 2, ErrorCode::kSingleClass, "oversampling needs at least two classes");
  const std::size_t majority = *std::max_element(counts.begin(), counts.end());

  if (spec.method == SamplerMethod::kSmote) {
    Require(spec.k_neighbors >= 1, ErrorCode::kInvalidHyperparameter, "k_neighbors must be >= 1");
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0 || counts[c] == majority) continue;
      Require(counts[c] >= spec.k_neighbors + 1, ErrorCode::kMinorityTooSmall,
              "class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                  " rows; SMOTE with k=" + std::to_string(spec.k_neighbors) + " needs at least " +
                  std::to_string(spec.k_neighbors + 1));
    }
  }

  Resampled out{x, Vector(y.begin(), y.end()), x.rows()};
  Rng rng(spec.seed);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0 || counts[c] == majority) continue;
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < y.size(); ++r) {
      if (static_cast<std::size_t>(y[r]) == c) members.push_back(r);
    }
    const std::size_t needed = majority - counts[c];
    std::vector<std::vector<std::size_t>> neighbors(members.size());
    Vector synthetic(x.cols());
    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t a = rng.index(members.size());
      if (spec.method == SamplerMethod::kRandom) {
        out.x.append_row(x.row(members[a]));
      } else {
        if (neighbors[a].empty()) neighbors[a] = NearestWithin(x, members, a, spec.k_neighbors);
        const std::size_t b = neighbors[a][rng.index(spec.k_neighbors)];
        const double u = rng.uniform();
        auto ra = x.row(members[a]);
        auto rb = x.row(members[b]);
        for (std::size_t j = 0; j < x.cols(); ++j) synthetic[j] = ra[j] + u * (rb[j] - ra[j]);
        out.x.append_row(synthetic);
      }
      out.y.push_back(static_cast<double>(c));
    }
  }
  return out;
}

std::optional<SamplerSpec> AutoSampler(std::span<const double> y, std::uint64_t seed) {
  auto counts = ClassCounts(y);
  counts.erase(std::remove(counts.begin(), counts.end(), 0), counts.end());
  if (counts.size() < 2) return std::nullopt;
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  if (static_cast<double>(*mx) / static_cast<double>(*mn) <= 1.5) return std::nullopt;
  if (*mn < 2) return SamplerSpec{SamplerMethod::kRandom, 0, seed};
  return SamplerSpec{SamplerMethod::kSmote, std::min<std::size_t>(5, *mn - 1), seed};
}

nlohmann::json ToJson(const SamplerSpec& spec) {
  nlohmann::json j = {{"method", SamplerMethodName(spec.method)}, {"seed", spec.seed}};
  if (spec.method == SamplerMethod::kSmote) j["k_neighbors"] = spec.k_neighbors;
  return j;
}

}  // namespace tabml::preprocess
