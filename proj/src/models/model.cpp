#include "tabml/models/model.hpp"

#include <algorithm>
#include <cmath>

#include "tabml/core/error.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/models/knn.hpp"
#include "tabml/models/linear.hpp"
#include "tabml/models/naive_bayes.hpp"
#include "tabml/models/svm.hpp"
#include "tabml/models/tree.hpp"
#include "tabml/neural/mlp.hpp"

namespace tabml::models {

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kLinearRegression: return "linear_regression";
    case Algorithm::kLogisticRegression: return "logistic_regression";
    case Algorithm::kSvm: return "svm";
    case Algorithm::kKnn: return "knn";
    case Algorithm::kNaiveBayes: return "naive_bayes";
    case Algorithm::kRandomForest: return "random_forest";
    case Algorithm::kGradientBoosting: return "gradient_boosting";
    case Algorithm::kMlp: return "mlp";
  }
  return "unknown";
}

std::optional<Algorithm> ParseAlgorithm(std::string_view name) {
  for (auto a : {Algorithm::kLinearRegression, Algorithm::kLogisticRegression, Algorithm::kSvm,
                 Algorithm::kKnn, Algorithm::kNaiveBayes, Algorithm::kRandomForest,
                 Algorithm::kGradientBoosting, Algorithm::kMlp}) {
    if (AlgorithmName(a) == name) return a;
  }
  return std::nullopt;
}

double ModelSpec::param(const std::string& name) const {
  auto it = params.find(name);
  Require(it != params.end(), ErrorCode::kInvalidHyperparameter,
          this->name() + " is missing hyperparameter '" + name + "'");
  return it->second;
}

std::size_t ModelSpec::count_param(const std::string& name) const {
  const double v = param(name);
  Require(v >= 0.0 && v == std::floor(v), ErrorCode::kInvalidHyperparameter,
          this->name() + "." + name + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

nlohmann::json ToJson(const ModelSpec& spec) {
  return {{"algorithm", AlgorithmName(spec.algorithm)},
          {"task", data::TaskName(spec.task)},
          {"params", spec.params},
          {"seed", spec.seed}};
}

ModelSpec ModelSpecFromJson(const nlohmann::json& j) {
  ModelSpec spec;
  auto a = ParseAlgorithm(j.at("algorithm").get<std::string>());
  Require(a.has_value(), ErrorCode::kUnknownAlgorithmName, "unknown algorithm " + j.at("algorithm").dump());
  auto t = data::ParseTask(j.at("task").get<std::string>());
  Require(t.has_value(), ErrorCode::kInvalidConfig, "unknown task " + j.at("task").dump());
  spec.algorithm = *a;
  spec.task = *t;
  spec.params = j.at("params").get<std::map<std::string, double>>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

Vector FittedModel::predict(const Matrix& x) const {
  Require(x.cols() == num_features_, ErrorCode::kDimensionMismatch,
          spec_.name() + " expects " + std::to_string(num_features_) + " features, got " +
              std::to_string(x.cols()));
  if (is_classifier()) return ArgmaxRows(Proba(x));
  return Regress(x);
}

Matrix FittedModel::predict_proba(const Matrix& x) const {
  Require(is_classifier(), ErrorCode::kNotAClassifier,
          spec_.name() + " is a regression model; no class probabilities");
  Require(x.cols() == num_features_, ErrorCode::kDimensionMismatch,
          spec_.name() + " expects " + std::to_string(num_features_) + " features, got " +
              std::to_string(x.cols()));
  return Proba(x);
}

Vector FittedModel::Regress(const Matrix&) const {
  throw Error(ErrorCode::kInternal, spec_.name() + " does not implement regression");
}

Matrix FittedModel::Proba(const Matrix&) const {
  throw Error(ErrorCode::kNotAClassifier, spec_.name() + " does not implement classification");
}

nlohmann::json FittedModel::to_json() const {
  return {{"format", "tabml-model"},
          {"version", 1},
          {"algorithm", AlgorithmName(spec_.algorithm)},
          {"spec", ToJson(spec_)},
          {"n_features", num_features_},
          {"n_classes", num_classes_},
          {"learned", LearnedJson()}};
}

ModelPtr Fit(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
             std::size_t num_classes) {
  Catalog::Default().Validate(spec);
  const std::size_t k = internal::ValidateTrainingData(spec, x, y, num_classes);
  switch (spec.algorithm) {
    case Algorithm::kLinearRegression: return FitLinearRegression(spec, x, y);
    case Algorithm::kLogisticRegression: return FitLogisticRegression(spec, x, y, k);
    case Algorithm::kSvm: return FitSvm(spec, x, y, k);
    case Algorithm::kKnn: return FitKnn(spec, x, y, k);
    case Algorithm::kNaiveBayes: return FitNaiveBayes(spec, x, y, k);
    case Algorithm::kRandomForest: return FitRandomForest(spec, x, y, k);
    case Algorithm::kGradientBoosting: return FitGradientBoosting(spec, x, y, k);
    case Algorithm::kMlp: return neural::FitMlp(spec, x, y, k);
  }
  throw Error(ErrorCode::kUnknownAlgorithmName, "unhandled algorithm");
}

ModelPtr LoadModel(const nlohmann::json& j) {
  Require(j.value("format", "") == "tabml-model", ErrorCode::kMalformedInput,
          "not a serialized model");
  const ModelSpec spec = ModelSpecFromJson(j.at("spec"));
  const auto n_features = j.at("n_features").get<std::size_t>();
  const auto n_classes = j.at("n_classes").get<std::size_t>();
  const auto& learned = j.at("learned");
  switch (spec.algorithm) {
    case Algorithm::kLinearRegression:
    case Algorithm::kLogisticRegression:
      return LoadLinear(spec, n_features, n_classes, learned);
    case Algorithm::kSvm: return LoadSvm(spec, n_features, n_classes, learned);
    case Algorithm::kKnn: return LoadKnn(spec, n_features, n_classes, learned);
    case Algorithm::kNaiveBayes: return LoadNaiveBayes(spec, n_features, n_classes, learned);
    case Algorithm::kRandomForest:
    case Algorithm::kGradientBoosting:
      return LoadTreeEnsemble(spec, n_features, n_classes, learned);
    case Algorithm::kMlp: return neural::LoadMlp(spec, n_features, n_classes, learned);
  }
  throw Error(ErrorCode::kUnknownAlgorithmName, "unhandled algorithm");
}

Vector ArgmaxRows(const Matrix& proba) {
  Vector out(proba.rows());
  for (std::size_t r = 0; r < proba.rows(); ++r) {
    auto row = proba.row(r);
    out[r] = static_cast<double>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

void SoftmaxRows(Matrix& scores) {
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace internal {

std::size_t ValidateTrainingData(const ModelSpec& spec, const Matrix& x,
                                 std::span<const double> y, std::size_t num_classes) {
  Require(x.rows() > 0 && x.cols() > 0, ErrorCode::kEmptyMatrix, spec.name() + ": no training data");
  Require(x.rows() == y.size(), ErrorCode::kDimensionMismatch,
          spec.name() + ": " + std::to_string(x.rows()) + " rows but " +
              std::to_string(y.size()) + " targets");
  for (double v : x.data()) {
    Require(std::isfinite(v), ErrorCode::kMalformedInput, spec.name() + ": non-finite feature value");
  }
  if (spec.task != Task::kClassification) {
    for (double v : y) {
      Require(std::isfinite(v), ErrorCode::kMalformedInput, spec.name() + ": non-finite target");
    }
    return 0;
  }
  std::size_t max_label = 0;
  for (double v : y) {
    Require(v >= 0.0 && v == std::floor(v), ErrorCode::kMalformedInput,
            spec.name() + ": class labels must be non-negative integers");
    max_label = std::max(max_label, static_cast<std::size_t>(v));
  }
  if (num_classes == 0) num_classes = max_label + 1;
  Require(max_label < num_classes, ErrorCode::kMalformedInput,
          spec.name() + ": label exceeds class count");
  return num_classes;
}

nlohmann::json MatrixToJson(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix MatrixFromJson(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  Require(data.size() == m.rows() * m.cols(), ErrorCode::kMalformedInput, "matrix payload size");
  m.data() = std::move(data);
  return m;
}

}  // namespace internal

}  // namespace tabml::models
