#ifndef TABML_MODELS_KNN_HPP_
#define TABML_MODELS_KNN_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::models {

// Stores the training set. Prediction looks at the k Euclidean-nearest rows
// (distance ties go to the smaller training index): majority vote with ties
// to the smaller class index, or the mean target for regression.
ModelPtr FitKnn(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                std::size_t num_classes);

ModelPtr LoadKnn(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                 const nlohmann::json& learned);

// Indices of the k nearest rows of `train` to `query`, nearest first.
std::vector<std::size_t> NearestRows(const Matrix& train, std::span<const double> query,
                                     std::size_t k);

}  // namespace tabml::models

#endif  // TABML_MODELS_KNN_HPP_
