#ifndef TABML_PIPELINE_METRICS_HPP_
#define TABML_PIPELINE_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"

namespace tabml::pipeline {

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  std::optional<double> auc;  // binary tasks with both classes present
  std::vector<std::vector<std::size_t>> confusion;  // rows: true, cols: predicted
};

struct RegressionMetrics {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

struct Metrics {
  models::Task task = models::Task::kClassification;
  std::optional<ClassificationMetrics> classification;
  std::optional<RegressionMetrics> regression;

  // Accuracy for classification, R^2 for regression.
  double primary() const;
};

nlohmann::json ToJson(const Metrics& metrics);

// Mann-Whitney AUC with average ranks (ties count one half). `positive` is
// 0/1. Empty when either class is absent.
std::optional<double> RankAuc(std::span<const double> scores, std::span<const double> positive);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep from the highest score down; tied scores move together.
std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const double> positive);

ClassificationMetrics ClassificationScores(std::span<const double> truth,
                                           std::span<const double> predicted,
                                           std::size_t num_classes,
                                           const Matrix* proba = nullptr);

RegressionMetrics RegressionScores(std::span<const double> truth, std::span<const double> predicted);

Metrics Evaluate(const models::FittedModel& model, const Matrix& x, std::span<const double> y);

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_METRICS_HPP_
