#include "tabml/models/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tabml/core/error.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::models {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

class NaiveBayesModel final : public FittedModel {
 public:
  NaiveBayesModel(ModelSpec spec, Vector priors, Matrix means, Matrix variances)
      : FittedModel(std::move(spec), means.cols(), priors.size()),
        priors_(std::move(priors)),
        means_(std::move(means)),
        variances_(std::move(variances)) {}

  const Vector& priors() const { return priors_; }

 protected:
  Matrix Proba(const Matrix& x) const override {
    const std::size_t k = num_classes();
    Matrix out(x.rows(), k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (priors_[c] <= 0.0) {
          out(r, c) = -std::numeric_limits<double>::infinity();
          continue;
        }
        double ll = std::log(priors_[c]);
        for (std::size_t j = 0; j < row.size(); ++j) {
          const double var = variances_(c, j);
          const double d = row[j] - means_(c, j);
          ll -= 0.5 * (kLog2Pi + std::log(var) + d * d / var);
        }
        out(r, c) = ll;
        mx = std::max(mx, ll);
      }
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        out(r, c) = std::exp(out(r, c) - mx);
        total += out(r, c);
      }
      for (std::size_t c = 0; c < k; ++c) out(r, c) /= total;
    }
    return out;
  }

  nlohmann::json LearnedJson() const override {
    return {{"priors", priors_},
            {"means", internal::MatrixToJson(means_)},
            {"variances", internal::MatrixToJson(variances_)}};
  }

 private:
  Vector priors_;
  Matrix means_;
  Matrix variances_;
};

}  // namespace

ModelPtr FitNaiveBayes(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                       std::size_t num_classes) {
  const auto counts = preprocess::ClassCounts(y);
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  Require(present >= 2, ErrorCode::kDegenerateTarget, "naive bayes needs at least two classes");
  const std::size_t p = x.cols();
  const std::size_t n = x.rows();

  Matrix means(num_classes, p);
  Matrix variances(num_classes, p);
  Vector priors(num_classes, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    priors[c] += 1.0;
    auto row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) means(c, j) += row[j];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (priors[c] == 0.0) continue;
    for (std::size_t j = 0; j < p; ++j) means(c, j) /= priors[c];
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    auto row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = row[j] - means(c, j);
      variances(c, j) += d * d;
    }
  }

  // Floor relative to the widest feature.
  const Vector overall = ColumnMeans(x);
  double max_var = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) v += (x(r, j) - overall[j]) * (x(r, j) - overall[j]);
    max_var = std::max(max_var, v / static_cast<double>(n));
  }
  const double floor_factor = spec.param("var_floor");
  double floor = floor_factor * max_var;
  if (!(floor > 0.0)) floor = floor_factor > 0.0 ? floor_factor : 1e-9;

  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t j = 0; j < p; ++j) {
      const double v = priors[c] > 0.0 ? variances(c, j) / priors[c] : 1.0;
      variances(c, j) = std::max(v, floor);
    }
  }
  for (double& prior : priors) prior /= static_cast<double>(n);
  return std::make_shared<NaiveBayesModel>(spec, std::move(priors), std::move(means),
                                           std::move(variances));
}

ModelPtr LoadNaiveBayes(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                        const nlohmann::json& learned) {
  Matrix means = internal::MatrixFromJson(learned.at("means"));
  Matrix variances = internal::MatrixFromJson(learned.at("variances"));
  auto priors = learned.at("priors").get<Vector>();
  Require(means.cols() == num_features && priors.size() == num_classes,
          ErrorCode::kMalformedInput, "naive bayes payload shape");
  return std::make_shared<NaiveBayesModel>(spec, std::move(priors), std::move(means),
                                           std::move(variances));
}

Vector NaiveBayesPriors(const FittedModel& model) {
  const auto* nb = dynamic_cast<const NaiveBayesModel*>(&model);
  Require(nb != nullptr, ErrorCode::kInvalidConfig, "not a naive bayes model");
  return nb->priors();
}

}  // namespace tabml::models
