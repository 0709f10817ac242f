#include "tabml/explain/counterfactual.hpp"

#include <cmath>
#include <limits>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"

namespace tabml::explain {

namespace {

std::size_t ArgMax(const Matrix& p, std::size_t r) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.cols(); ++c) {
    if (p(r, c) > p(r, best)) best = c;
  }
  return best;
}

struct Candidate {
  Vector row;
  std::size_t feature = 0;
};

}  // namespace

Counterfactual FindCounterfactual(const ProbaFunction& proba, std::span<const double> instance,
                                  std::size_t desired_class, std::span<const double> lower,
                                  std::span<const double> upper,
                                  const CounterfactualOptions& options) {
  const std::size_t p = instance.size();
  Require(p > 0 && lower.size() == p && upper.size() == p, ErrorCode::kDimensionMismatch,
          "counterfactual bounds do not match the instance");
  Require(options.grid_points >= 2, ErrorCode::kInvalidHyperparameter,
          "counterfactual grid needs at least 2 points");
  Counterfactual out;
  out.instance.assign(instance.begin(), instance.end());
  out.desired_class = desired_class;

  Matrix start(1, p);
  std::copy(instance.begin(), instance.end(), start.row(0).begin());
  const Matrix p0 = proba(start);
  Require(desired_class < p0.cols(), ErrorCode::kInvalidHyperparameter,
          "desired class " + std::to_string(desired_class) + " out of range");
  out.original_class = ArgMax(p0, 0);
  Require(out.original_class != desired_class, ErrorCode::kAlreadyDesiredClass,
          "instance is already predicted as class " + std::to_string(desired_class));

  auto distance = [&](std::span<const double> row) {
    double d = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double range = upper[j] - lower[j];
      if (range > 0.0) d += std::abs(row[j] - instance[j]) / range;
    }
    return d;
  };

  Vector current(instance.begin(), instance.end());
  std::vector<bool> fixed(p, false);
  std::vector<std::size_t> changed;
  for (std::size_t step = 0; step < options.max_changed_features; ++step) {
    CheckDeadline();
    std::vector<Candidate> candidates;
    for (std::size_t j = 0; j < p; ++j) {
      const double range = upper[j] - lower[j];
      if (fixed[j] || !(range > 0.0)) continue;
      for (std::size_t g = 0; g < options.grid_points; ++g) {
        double v = lower[j] + range * static_cast<double>(g) / static_cast<double>(options.grid_points - 1);
        if (g + 1 == options.grid_points) v = upper[j];
        if (v == current[j]) continue;
        Candidate c{current, j};
        c.row[j] = v;
        candidates.push_back(std::move(c));
      }
    }
    if (candidates.empty()) break;
    Matrix batch(candidates.size(), p);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::copy(candidates[i].row.begin(), candidates[i].row.end(), batch.row(i).begin());
    }
    const Matrix probs = proba(batch);

    std::size_t best_flip = candidates.size();
    double best_distance = std::numeric_limits<double>::infinity();
    std::size_t best_push = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (probs(i, desired_class) > probs(best_push, desired_class)) best_push = i;
      if (ArgMax(probs, i) != desired_class) continue;
      const double d = distance(candidates[i].row);
      if (d < best_distance) {
        best_distance = d;
        best_flip = i;
      }
    }
    if (best_flip < candidates.size()) {
      changed.push_back(candidates[best_flip].feature);
      out.found = true;
      out.counterfactual = candidates[best_flip].row;
      out.changed_features = changed;
      out.distance = best_distance;
      return out;
    }
    fixed[candidates[best_push].feature] = true;
    changed.push_back(candidates[best_push].feature);
    current = candidates[best_push].row;
  }
  return out;
}

nlohmann::json ToJson(const Counterfactual& cf) {
  nlohmann::json j = {{"method", "counterfactual"},
                      {"instance", cf.instance},
                      {"original_class", cf.original_class},
                      {"desired_class", cf.desired_class},
                      {"found", cf.found}};
  if (cf.found) {
    j["counterfactual"] = cf.counterfactual;
    j["changed_features"] = cf.changed_features;
    j["distance"] = cf.distance;
  } else {
    j["counterfactual"] = nullptr;
  }
  return j;
}

}  // namespace tabml::explain
