#include "tabml/models/svm.hpp"

#include <algorithm>
#include <cmath>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::models {
namespace {

class SvmModel final : public FittedModel {
 public:
  SvmModel(ModelSpec spec, std::size_t num_features, std::size_t num_classes, Matrix coef)
      : FittedModel(std::move(spec), num_features, num_classes), coef_(std::move(coef)) {}

  Matrix Decision(const Matrix& x) const {
    const std::size_t p = num_features();
    Matrix out(x.rows(), coef_.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < coef_.rows(); ++c) {
        out(r, c) = Dot(x.row(r), coef_.row(c).first(p)) + coef_(c, p);
      }
    }
    return out;
  }

 protected:
  Matrix Proba(const Matrix& x) const override {
    Matrix d = Decision(x);
    if (coef_.rows() == 1) {
      Matrix out(x.rows(), 2);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double p1 = Sigmoid(d(r, 0));
        out(r, 0) = 1.0 - p1;
        out(r, 1) = p1;
      }
      return out;
    }
    SoftmaxRows(d);
    return d;
  }
  nlohmann::json LearnedJson() const override { return {{"coef", internal::MatrixToJson(coef_)}}; }

 private:
  Matrix coef_;
};

// Pegasos on labels in {-1, +1}; returns [w, b].
Vector Pegasos(const Matrix& x, std::span<const double> signs, double lambda,
               std::size_t iterations, Rng& rng) {
  const std::size_t p = x.cols();
  Vector w(p + 1, 0.0);
  for (std::size_t t = 1; t <= iterations; ++t) {
    if (t % 4096 == 0) CheckDeadline();
    const std::size_t i = rng.index(x.rows());
    auto row = x.row(i);
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    const double margin = signs[i] * (Dot(row, std::span<const double>(w).first(p)) + w[p]);
    const double shrink = 1.0 - eta * lambda;
    for (double& v : w) v *= shrink;
    if (margin < 1.0) {
      for (std::size_t j = 0; j < p; ++j) w[j] += eta * signs[i] * row[j];
      w[p] += eta * signs[i];
    }
  }
  return w;
}

}  // namespace

ModelPtr FitSvm(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                std::size_t num_classes) {
  const auto counts = preprocess::ClassCounts(y);
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  Require(present >= 2, ErrorCode::kDegenerateTarget, "svm needs at least two classes");
  const double lambda = spec.param("lambda");
  const std::size_t iterations = spec.count_param("iterations_per_row") * x.rows();
  const std::size_t p = x.cols();

  const std::size_t problems = num_classes == 2 ? 1 : num_classes;
  Matrix coef(problems, p + 1);
  Vector signs(y.size());
  for (std::size_t c = 0; c < problems; ++c) {
    const double positive = num_classes == 2 ? 1.0 : static_cast<double>(c);
    for (std::size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == positive ? 1.0 : -1.0;
    Rng rng(DeriveSeed(spec.seed, c));
    Vector w = Pegasos(x, signs, lambda, iterations, rng);
    std::copy(w.begin(), w.end(), coef.row(c).begin());
  }
  return std::make_shared<SvmModel>(spec, p, num_classes, std::move(coef));
}

ModelPtr LoadSvm(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                 const nlohmann::json& learned) {
  Matrix coef = internal::MatrixFromJson(learned.at("coef"));
  Require(coef.cols() == num_features + 1, ErrorCode::kMalformedInput, "svm coefficient width");
  return std::make_shared<SvmModel>(spec, num_features, num_classes, std::move(coef));
}

Matrix SvmDecisionFunction(const FittedModel& model, const Matrix& x) {
  const auto* svm = dynamic_cast<const SvmModel*>(&model);
  Require(svm != nullptr, ErrorCode::kInvalidConfig, "not an svm model");
  Require(x.cols() == model.num_features(), ErrorCode::kDimensionMismatch, "svm feature count");
  return svm->Decision(x);
}

}  // namespace tabml::models
