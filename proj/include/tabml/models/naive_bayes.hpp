#ifndef TABML_MODELS_NAIVE_BAYES_HPP_
#define TABML_MODELS_NAIVE_BAYES_HPP_

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::models {

// Gaussian naive Bayes. Per-class variances are floored at
// var_floor * (largest feature variance); posteriors are computed in log space.
ModelPtr FitNaiveBayes(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                       std::size_t num_classes);

ModelPtr LoadNaiveBayes(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                        const nlohmann::json& learned);

// Empirical class priors of a fitted naive Bayes model.
Vector NaiveBayesPriors(const FittedModel& model);

}  // namespace tabml::models

#endif  // TABML_MODELS_NAIVE_BAYES_HPP_
