#ifndef TABML_NEURAL_MLP_HPP_
#define TABML_NEURAL_MLP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/core/random.hpp"
#include "tabml/models/model.hpp"

namespace tabml::neural {

// Fully connected network with ReLU hidden layers. The output layer is a
// softmax over classes (cross-entropy) or a single identity unit (squared loss).
// Parameters live in one flat vector: per layer, the weight matrix
// (outputs x inputs, row-major) followed by the bias vector.
struct MlpShape {
  std::vector<std::size_t> layers;  // input width, hidden widths..., output width
  bool classification = true;

  std::size_t num_params() const;
};

MlpShape MakeShape(std::size_t inputs, std::size_t hidden_layers, std::size_t hidden_units,
                   std::size_t outputs, bool classification);

// Xavier-uniform weights, zero biases.
Vector XavierInit(const MlpShape& shape, Rng& rng);

// Class probabilities or regression outputs, one row per input row.
Matrix Forward(const MlpShape& shape, std::span<const double> params, const Matrix& x);

// Mean loss over `rows` of (x, y): cross-entropy for classification (y holds
// class indices), mean squared error for regression. When `gradient` is not
// null it receives d loss / d params.
double Loss(const MlpShape& shape, std::span<const double> params, const Matrix& x,
            std::span<const double> y, std::span<const std::size_t> rows,
            Vector* gradient = nullptr);

// Convenience overload over every row.
double Loss(const MlpShape& shape, std::span<const double> params, const Matrix& x,
            std::span<const double> y, Vector* gradient = nullptr);

models::ModelPtr FitMlp(const models::ModelSpec& spec, const Matrix& x, std::span<const double> y,
                        std::size_t num_classes);

models::ModelPtr LoadMlp(const models::ModelSpec& spec, std::size_t num_features,
                         std::size_t num_classes, const nlohmann::json& learned);

// Full-data training loss after each epoch.
const Vector& MlpLossTrace(const models::FittedModel& model);

}  // namespace tabml::neural

#endif  // TABML_NEURAL_MLP_HPP_
