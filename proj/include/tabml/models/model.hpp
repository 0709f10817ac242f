#ifndef TABML_MODELS_MODEL_HPP_
#define TABML_MODELS_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/data/schema.hpp"

namespace tabml::models {

using data::Task;

enum class Algorithm {
  kLinearRegression,
  kLogisticRegression,
  kSvm,
  kKnn,
  kNaiveBayes,
  kRandomForest,
  kGradientBoosting,
  kMlp,
};

std::string_view AlgorithmName(Algorithm algorithm);
std::optional<Algorithm> ParseAlgorithm(std::string_view name);

struct ModelSpec {
  Algorithm algorithm = Algorithm::kKnn;
  Task task = Task::kClassification;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  // Value of a hyperparameter; throws InvalidHyperparameter if absent.
  double param(const std::string& name) const;
  std::size_t count_param(const std::string& name) const;
  std::string name() const { return std::string(AlgorithmName(algorithm)); }
};

nlohmann::json ToJson(const ModelSpec& spec);
ModelSpec ModelSpecFromJson(const nlohmann::json& j);

// A trained model. Immutable after fitting; predict is safe to call from any
// number of threads. Classifiers predict class indices (as doubles) and the
// predicted class is always the first argmax of predict_proba.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  const ModelSpec& spec() const { return spec_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return num_classes_; }
  bool is_classifier() const { return spec_.task == Task::kClassification; }

  Vector predict(const Matrix& x) const;
  Matrix predict_proba(const Matrix& x) const;

  // Self-describing document: algorithm, spec, dimensions and learned arrays.
  nlohmann::json to_json() const;

 protected:
  FittedModel(ModelSpec spec, std::size_t num_features, std::size_t num_classes)
      : spec_(std::move(spec)), num_features_(num_features), num_classes_(num_classes) {}

  // Regression models override Regress; classifiers override Proba.
  virtual Vector Regress(const Matrix& x) const;
  virtual Matrix Proba(const Matrix& x) const;
  virtual nlohmann::json LearnedJson() const = 0;

 private:
  ModelSpec spec_;
  std::size_t num_features_;
  std::size_t num_classes_;
};

using ModelPtr = std::shared_ptr<const FittedModel>;

// Fits `spec` on (x, y). Classification labels are class indices; when
// `num_classes` is 0 it is taken as max(y) + 1.
ModelPtr Fit(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
             std::size_t num_classes = 0);

// Restores a model written by FittedModel::to_json.
ModelPtr LoadModel(const nlohmann::json& j);

// Index of the first maximum of each row.
Vector ArgmaxRows(const Matrix& proba);

// Row-wise softmax, numerically stabilized.
void SoftmaxRows(Matrix& scores);

double Sigmoid(double z);

namespace internal {

// Checks shapes and label ranges shared by every fit routine and returns the
// resolved class count (0 for regression).
std::size_t ValidateTrainingData(const ModelSpec& spec, const Matrix& x,
                                 std::span<const double> y, std::size_t num_classes);

// Helpers used by the per-algorithm JSON loaders.
Matrix MatrixFromJson(const nlohmann::json& j);
nlohmann::json MatrixToJson(const Matrix& m);

}  // namespace internal

}  // namespace tabml::models

#endif  // TABML_MODELS_MODEL_HPP_
