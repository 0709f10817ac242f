#include "tabml/explain/shap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"

namespace tabml::explain {

std::string_view ShapModeName(ShapMode mode) {
  return mode == ShapMode::kExact ? "exact" : "sampled";
}

namespace {

// Mean output over background rows for a batch of coalitions. Rows of the
// evaluation matrix are coalition-major.
Vector CoalitionValues(const ModelFunction& f, std::span<const double> instance,
                       const Matrix& background, const std::vector<std::vector<bool>>& masks) {
  const std::size_t nb = background.rows();
  const std::size_t p = instance.size();
  Matrix x(masks.size() * nb, p);
  for (std::size_t m = 0; m < masks.size(); ++m) {
    for (std::size_t b = 0; b < nb; ++b) {
      auto row = x.row(m * nb + b);
      auto bg = background.row(b);
      for (std::size_t j = 0; j < p; ++j) row[j] = masks[m][j] ? instance[j] : bg[j];
    }
  }
  const Vector out = f(x);
  Vector values(masks.size(), 0.0);
  for (std::size_t m = 0; m < masks.size(); ++m) {
    double s = 0.0;
    for (std::size_t b = 0; b < nb; ++b) s += out[m * nb + b];
    values[m] = s / static_cast<double>(nb);
  }
  return values;
}

void ExactShap(const ModelFunction& f, const Matrix& background, ShapValues& out) {
  const std::size_t p = out.instance.size();
  Require(p <= kMaxExactShapFeatures, ErrorCode::kTooManyFeaturesForExact,
          "exact SHAP supports at most " + std::to_string(kMaxExactShapFeatures) + " features, got " +
              std::to_string(p));
  const std::size_t count = std::size_t{1} << p;
  Vector worth(count);
  // Evaluate in chunks to bound memory.
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < count; start += kChunk) {
    CheckDeadline();
    std::vector<std::vector<bool>> masks;
    for (std::size_t s = start; s < std::min(count, start + kChunk); ++s) {
      std::vector<bool> m(p);
      for (std::size_t j = 0; j < p; ++j) m[j] = (s >> j) & 1U;
      masks.push_back(std::move(m));
    }
    Vector v = CoalitionValues(f, out.instance, background, masks);
    std::copy(v.begin(), v.end(), worth.begin() + static_cast<std::ptrdiff_t>(start));
  }
  Vector factorial(p + 1, 1.0);
  for (std::size_t i = 1; i <= p; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);
  out.values.assign(p, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const auto size = static_cast<std::size_t>(__builtin_popcountll(s));
    if (size == p) continue;
    const double w = factorial[size] * factorial[p - size - 1] / factorial[p];
    for (std::size_t j = 0; j < p; ++j) {
      if ((s >> j) & 1U) continue;
      out.values[j] += w * (worth[s | (std::size_t{1} << j)] - worth[s]);
    }
  }
  out.baseline = worth[0];
  out.output = worth[count - 1];
  out.coalitions = count;
}

void SampledShap(const ModelFunction& f, const Matrix& background, ShapValues& out) {
  const std::size_t p = out.instance.size();
  std::vector<std::vector<bool>> ends = {std::vector<bool>(p, false), std::vector<bool>(p, true)};
  const Vector end_values = CoalitionValues(f, out.instance, background, ends);
  out.baseline = end_values[0];
  out.output = end_values[1];
  const double delta = out.output - out.baseline;
  if (p == 1) {
    out.values = {delta};
    out.coalitions = 2;
    return;
  }

  // Coalition sizes follow the Shapley kernel: P(s) ~ (p - 1) / (s (p - s)).
  Vector size_weight(p, 0.0);
  for (std::size_t s = 1; s < p; ++s) {
    size_weight[s] = static_cast<double>(p - 1) / static_cast<double>(s * (p - s));
  }
  const double total_weight = std::accumulate(size_weight.begin(), size_weight.end(), 0.0);
  Rng rng(out.seed);
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<bool>> masks;
  masks.reserve(kKernelShapSamples);
  for (std::size_t m = 0; m < kKernelShapSamples; ++m) {
    double u = rng.uniform() * total_weight;
    std::size_t size = 1;
    for (; size + 1 < p; ++size) {
      if (u < size_weight[size]) break;
      u -= size_weight[size];
    }
    rng.shuffle(order);
    std::vector<bool> mask(p, false);
    for (std::size_t i = 0; i < size; ++i) mask[order[i]] = true;
    masks.push_back(std::move(mask));
  }
  Vector worth;
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < masks.size(); start += kChunk) {
    CheckDeadline();
    std::vector<std::vector<bool>> chunk(masks.begin() + static_cast<std::ptrdiff_t>(start),
                                         masks.begin() + static_cast<std::ptrdiff_t>(std::min(masks.size(), start + kChunk)));
    Vector v = CoalitionValues(f, out.instance, background, chunk);
    worth.insert(worth.end(), v.begin(), v.end());
  }

  // Eliminate the last attribution through the efficiency constraint.
  const std::size_t q = p - 1;
  Matrix ata(q, q);
  Vector atb(q, 0.0);
  Vector a(q);
  for (std::size_t m = 0; m < masks.size(); ++m) {
    const double zp = masks[m][q] ? 1.0 : 0.0;
    const double t = worth[m] - out.baseline - zp * delta;
    for (std::size_t j = 0; j < q; ++j) a[j] = (masks[m][j] ? 1.0 : 0.0) - zp;
    for (std::size_t i = 0; i < q; ++i) {
      atb[i] += a[i] * t;
      for (std::size_t j = 0; j < q; ++j) ata(i, j) += a[i] * a[j];
    }
  }
  Vector phi;
  double jitter = 0.0;
  while (!CholeskySolve(ata, atb, phi)) {
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    for (std::size_t i = 0; i < q; ++i) ata(i, i) += jitter;
  }
  double sum = std::accumulate(phi.begin(), phi.end(), 0.0);
  phi.push_back(delta - sum);
  out.values = std::move(phi);
  out.coalitions = masks.size() + 2;
}

}  // namespace

ShapValues Shap(const ModelFunction& f, std::span<const double> instance,
                const Matrix& background, ShapMode mode, std::uint64_t seed) {
  Require(background.rows() > 0, ErrorCode::kEmptyMatrix, "SHAP needs background rows");
  Require(instance.size() == background.cols() && !instance.empty(), ErrorCode::kDimensionMismatch,
          "instance width does not match the background");
  ShapValues out;
  out.mode = mode;
  out.seed = seed;
  out.instance.assign(instance.begin(), instance.end());
  if (mode == ShapMode::kExact) {
    ExactShap(f, background, out);
  } else {
    SampledShap(f, background, out);
  }
  return out;
}

nlohmann::json ToJson(const ShapValues& shap) {
  return {{"method", "shap"},
          {"mode", ShapModeName(shap.mode)},
          {"instance", shap.instance},
          {"values", shap.values},
          {"baseline", shap.baseline},
          {"output", shap.output},
          {"coalitions", shap.coalitions},
          {"seed", shap.seed}};
}

}  // namespace tabml::explain
