#ifndef TABML_EXPLAIN_MODEL_FUNCTION_HPP_
#define TABML_EXPLAIN_MODEL_FUNCTION_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::explain {

// Scalar model output per row: a class probability or a regression value.
using ModelFunction = std::function<Vector(const Matrix&)>;
// Class probability rows; the predicted class is the first argmax.
using ProbaFunction = std::function<Matrix(const Matrix&)>;

// Probability of `class_index` for classifiers, the prediction for regressors.
ModelFunction OutputOf(models::ModelPtr model, std::size_t class_index = 0);
ProbaFunction ProbaOf(models::ModelPtr model);

// Class explained by default: the positive class of a binary model, else the
// class predicted for `instance`; 0 for regressors.
std::size_t DefaultExplainedClass(const models::FittedModel& model,
                                  std::span<const double> instance);

}  // namespace tabml::explain

#endif  // TABML_EXPLAIN_MODEL_FUNCTION_HPP_
