#ifndef TABML_MODELS_SVM_HPP_
#define TABML_MODELS_SVM_HPP_

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::models {

// Linear soft-margin SVM trained with Pegasos (step 1 / (lambda * t)) for
// iterations_per_row * n_rows seeded stochastic subgradient steps. The bias is
// learned as the weight of a constant feature. Multiclass uses one-vs-rest;
// probabilities are the sigmoid (binary) or softmax (multiclass) of the
// decision values, so the predicted class matches sign(w.x + b).
ModelPtr FitSvm(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                std::size_t num_classes);

ModelPtr LoadSvm(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                 const nlohmann::json& learned);

// Raw decision values w.x + b, one column per binary problem.
Matrix SvmDecisionFunction(const FittedModel& model, const Matrix& x);

}  // namespace tabml::models

#endif  // TABML_MODELS_SVM_HPP_
