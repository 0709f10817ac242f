#include "tabml/models/linear.hpp"

#include <algorithm>
#include <cmath>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::models {
namespace {

// log(1 + exp(z)) without overflow.
double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

class LinearRegressionModel final : public FittedModel {
 public:
  LinearRegressionModel(ModelSpec spec, Vector weights, double bias)
      : FittedModel(std::move(spec), weights.size(), 0), weights_(std::move(weights)), bias_(bias) {}

  const Vector& weights() const { return weights_; }
  double bias() const { return bias_; }

 protected:
  Vector Regress(const Matrix& x) const override {
    Vector out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = Dot(x.row(r), weights_) + bias_;
    return out;
  }
  nlohmann::json LearnedJson() const override {
    return {{"weights", weights_}, {"bias", bias_}};
  }

 private:
  Vector weights_;
  double bias_;
};

// One weight row per binary problem; the last column of `coef_` is the bias.
class LogisticRegressionModel final : public FittedModel {
 public:
  LogisticRegressionModel(ModelSpec spec, std::size_t num_features, std::size_t num_classes,
                          Matrix coef)
      : FittedModel(std::move(spec), num_features, num_classes), coef_(std::move(coef)) {}

 protected:
  Matrix Proba(const Matrix& x) const override {
    const std::size_t k = num_classes();
    const std::size_t p = num_features();
    Matrix out(x.rows(), k);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      if (coef_.rows() == 1) {
        const double z = Dot(row, coef_.row(0).first(p)) + coef_(0, p);
        const double p1 = Sigmoid(z);
        out(r, 0) = 1.0 - p1;
        out(r, 1) = p1;
        continue;
      }
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double z = Dot(row, coef_.row(c).first(p)) + coef_(c, p);
        out(r, c) = Sigmoid(z);
        total += out(r, c);
      }
      for (std::size_t c = 0; c < k; ++c) {
        out(r, c) = total > 0.0 ? out(r, c) / total : 1.0 / static_cast<double>(k);
      }
    }
    return out;
  }
  nlohmann::json LearnedJson() const override { return {{"coef", internal::MatrixToJson(coef_)}}; }

 private:
  Matrix coef_;
};

}  // namespace

double BinaryLogisticObjective::Value(std::span<const double> params) const {
  const std::size_t p = x_.cols();
  auto w = params.first(p);
  const double b = params[p];
  double loss = 0.0;
  for (std::size_t r = 0; r < x_.rows(); ++r) {
    const double z = Dot(x_.row(r), w) + b;
    loss += Softplus(z) - labels_[r] * z;
  }
  loss /= static_cast<double>(x_.rows());
  return loss + 0.5 * l2_ * Dot(w, w);
}

Vector BinaryLogisticObjective::Gradient(std::span<const double> params) const {
  const std::size_t p = x_.cols();
  auto w = params.first(p);
  const double b = params[p];
  Vector g(p + 1, 0.0);
  for (std::size_t r = 0; r < x_.rows(); ++r) {
    auto row = x_.row(r);
    const double err = Sigmoid(Dot(row, w) + b) - labels_[r];
    for (std::size_t j = 0; j < p; ++j) g[j] += err * row[j];
    g[p] += err;
  }
  const double inv_n = 1.0 / static_cast<double>(x_.rows());
  for (double& v : g) v *= inv_n;
  for (std::size_t j = 0; j < p; ++j) g[j] += l2_ * w[j];
  return g;
}

DescentResult MinimizeLogistic(const BinaryLogisticObjective& objective, std::size_t dim,
                               double tol, std::size_t max_iter) {
  DescentResult result;
  result.params.assign(dim, 0.0);
  double value = objective.Value(result.params);
  Vector grad = objective.Gradient(result.params);
  double step = 1.0;
  Vector trial(dim);
  for (; result.iterations < max_iter; ++result.iterations) {
    double inf_norm = 0.0;
    for (double g : grad) inf_norm = std::max(inf_norm, std::abs(g));
    result.gradient_inf_norm = inf_norm;
    if (inf_norm < tol) break;
    if (result.iterations % 64 == 0) CheckDeadline();

    const double g2 = Dot(grad, grad);
    step = std::min(step * 2.0, 1e6);
    double trial_value = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = result.params[j] - step * grad[j];
      trial_value = objective.Value(trial);
      if (trial_value <= value - 1e-4 * step * g2 || step < 1e-16) break;
      step *= 0.5;
    }
    if (step < 1e-16) break;
    result.params.swap(trial);
    value = trial_value;
    grad = objective.Gradient(result.params);
  }
  return result;
}

ModelPtr FitLinearRegression(const ModelSpec& spec, const Matrix& x, std::span<const double> y) {
  Require(x.rows() >= 2, ErrorCode::kTooFewRows, "linear regression needs at least 2 rows");
  const std::size_t p = x.cols();
  // Centering makes the Gram matrix better conditioned; the intercept is
  // recovered afterwards.
  const Vector mean = ColumnMeans(x);
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(y.size());

  Matrix gram(p, p);
  Vector rhs(p, 0.0);
  Vector centered(p);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t j = 0; j < p; ++j) centered[j] = row[j] - mean[j];
    const double yc = y[r] - y_mean;
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += centered[i] * yc;
      for (std::size_t j = 0; j <= i; ++j) gram(i, j) += centered[i] * centered[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram(j, i) = gram(i, j);
  }

  Vector w;
  double jitter = spec.param("jitter");
  double scale = 1.0;
  for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, gram(i, i));
  bool solved = CholeskySolve(gram, rhs, w, 1e-12);
  for (int attempt = 0; !solved && attempt < 20; ++attempt) {
    Matrix jittered = gram;
    const double eps = std::max(jitter, 1e-12) * scale * std::pow(10.0, attempt);
    for (std::size_t i = 0; i < p; ++i) jittered(i, i) += eps;
    solved = CholeskySolve(jittered, rhs, w);
  }
  Require(solved, ErrorCode::kInternal, "normal equations could not be solved");
  const double bias = y_mean - Dot(mean, w);
  return std::make_shared<LinearRegressionModel>(spec, std::move(w), bias);
}

ModelPtr FitLogisticRegression(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                               std::size_t num_classes) {
  const auto counts = preprocess::ClassCounts(y);
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  Require(present >= 2, ErrorCode::kDegenerateTarget,
          "logistic regression needs at least two classes in the training data");
  const double l2 = spec.param("l2");
  const double tol = spec.param("tol");
  const std::size_t max_iter = spec.count_param("max_iter");
  const std::size_t p = x.cols();

  const std::size_t problems = num_classes == 2 ? 1 : num_classes;
  Matrix coef(problems, p + 1);
  Vector labels(y.size());
  for (std::size_t c = 0; c < problems; ++c) {
    const double positive = num_classes == 2 ? 1.0 : static_cast<double>(c);
    for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] == positive ? 1.0 : 0.0;
    BinaryLogisticObjective objective(x, labels, l2);
    DescentResult fit = MinimizeLogistic(objective, p + 1, tol, max_iter);
    std::copy(fit.params.begin(), fit.params.end(), coef.row(c).begin());
  }
  return std::make_shared<LogisticRegressionModel>(spec, p, num_classes, std::move(coef));
}

ModelPtr LoadLinear(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                    const nlohmann::json& learned) {
  if (spec.algorithm == Algorithm::kLinearRegression) {
    auto w = learned.at("weights").get<Vector>();
    Require(w.size() == num_features, ErrorCode::kMalformedInput, "weight count");
    return std::make_shared<LinearRegressionModel>(spec, std::move(w),
                                                   learned.at("bias").get<double>());
  }
  Matrix coef = internal::MatrixFromJson(learned.at("coef"));
  Require(coef.cols() == num_features + 1, ErrorCode::kMalformedInput, "coefficient width");
  return std::make_shared<LogisticRegressionModel>(spec, num_features, num_classes, std::move(coef));
}

}  // namespace tabml::models
