#ifndef TABML_MODELS_LINEAR_HPP_
#define TABML_MODELS_LINEAR_HPP_

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::models {

// Ordinary least squares with intercept via the normal equations. A ridge
// jitter is added to the Gram matrix only when Cholesky fails.
ModelPtr FitLinearRegression(const ModelSpec& spec, const Matrix& x, std::span<const double> y);

// L2-regularized logistic regression; one-vs-rest for more than two classes.
ModelPtr FitLogisticRegression(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                               std::size_t num_classes);

ModelPtr LoadLinear(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                    const nlohmann::json& learned);

// Mean binary log-loss plus (l2 / 2) * |w|^2 over parameters laid out as
// [w_0 .. w_{p-1}, bias]. The bias is not penalized. Labels are 0/1.
class BinaryLogisticObjective {
 public:
  BinaryLogisticObjective(const Matrix& x, std::span<const double> labels, double l2)
      : x_(x), labels_(labels), l2_(l2) {}

  double Value(std::span<const double> params) const;
  Vector Gradient(std::span<const double> params) const;

 private:
  const Matrix& x_;
  std::span<const double> labels_;
  double l2_;
};

struct DescentResult {
  Vector params;
  std::size_t iterations = 0;
  double gradient_inf_norm = 0.0;
};

// Gradient descent with Armijo backtracking. Stops when the gradient
// infinity-norm drops below `tol` or after `max_iter` iterations.
DescentResult MinimizeLogistic(const BinaryLogisticObjective& objective, std::size_t dim,
                               double tol, std::size_t max_iter);

}  // namespace tabml::models

#endif  // TABML_MODELS_LINEAR_HPP_
