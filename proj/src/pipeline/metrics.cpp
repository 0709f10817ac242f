#include "tabml/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/error.hpp"
#include "tabml/stats/correlation.hpp"

namespace tabml::pipeline {

double Metrics::primary() const {
  if (classification) return classification->accuracy;
  if (regression) return regression->r2;
  return 0.0;
}

nlohmann::json ToJson(const Metrics& metrics) {
  nlohmann::json j = nlohmann::json::object();
  if (metrics.classification) {
    const auto& c = *metrics.classification;
    j["accuracy"] = c.accuracy;
    j["precision"] = c.precision;
    j["recall"] = c.recall;
    j["f1"] = c.f1;
    j["auc"] = c.auc ? nlohmann::json(*c.auc) : nlohmann::json(nullptr);
    j["confusion_matrix"] = c.confusion;
  }
  if (metrics.regression) {
    const auto& r = *metrics.regression;
    j["mse"] = r.mse;
    j["rmse"] = r.rmse;
    j["mae"] = r.mae;
    j["r2"] = r.r2;
  }
  return j;
}

std::optional<double> RankAuc(std::span<const double> scores, std::span<const double> positive) {
  Require(scores.size() == positive.size(), ErrorCode::kLengthMismatch, "auc length mismatch");
  const Vector ranks = stats::AverageRanks(scores);
  double n_pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (positive[i] == 1.0) {
      n_pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> RocCurve(std::span<const double> scores, std::span<const double> positive) {
  Require(scores.size() == positive.size(), ErrorCode::kLengthMismatch, "roc length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  double n_pos = 0.0;
  for (double p : positive) n_pos += p == 1.0 ? 1.0 : 0.0;
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  std::vector<RocPoint> out = {{0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (positive[order[i]] == 1.0) {
        tp += 1.0;
      } else {
        fp += 1.0;
      }
    }
    out.push_back({n_neg > 0.0 ? fp / n_neg : 0.0, n_pos > 0.0 ? tp / n_pos : 0.0});
  }
  return out;
}

ClassificationMetrics ClassificationScores(std::span<const double> truth,
                                           std::span<const double> predicted,
                                           std::size_t num_classes, const Matrix* proba) {
  Require(truth.size() == predicted.size(), ErrorCode::kDimensionMismatch,
          "prediction count does not match labels");
  Require(!truth.empty(), ErrorCode::kEmptyMatrix, "no rows to evaluate");
  ClassificationMetrics m;
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    Require(t < num_classes && p < num_classes, ErrorCode::kDimensionMismatch, "label out of range");
    ++m.confusion[t][p];
    if (t == p) ++hits;
  }
  m.accuracy = static_cast<double>(hits) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    double tp = static_cast<double>(m.confusion[c][c]);
    double predicted_c = 0.0;
    double actual_c = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      predicted_c += static_cast<double>(m.confusion[k][c]);
      actual_c += static_cast<double>(m.confusion[c][k]);
    }
    const double prec = predicted_c > 0.0 ? tp / predicted_c : 0.0;
    const double rec = actual_c > 0.0 ? tp / actual_c : 0.0;
    m.precision += prec;
    m.recall += rec;
    m.f1 += prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  const auto k = static_cast<double>(num_classes);
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  if (proba != nullptr && num_classes == 2) {
    Vector positive(truth.begin(), truth.end());
    m.auc = RankAuc(proba->column(1), positive);
  }
  return m;
}

RegressionMetrics RegressionScores(std::span<const double> truth, std::span<const double> predicted) {
  Require(truth.size() == predicted.size(), ErrorCode::kDimensionMismatch,
          "prediction count does not match targets");
  Require(!truth.empty(), ErrorCode::kEmptyMatrix, "no rows to evaluate");
  const auto n = static_cast<double>(truth.size());
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - predicted[i];
    ss_res += d * d;
    abs_sum += std::abs(d);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  RegressionMetrics m;
  m.mse = ss_res / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = abs_sum / n;
  if (ss_tot > 0.0) {
    m.r2 = 1.0 - ss_res / ss_tot;
  } else {
    m.r2 = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return m;
}

Metrics Evaluate(const models::FittedModel& model, const Matrix& x, std::span<const double> y) {
  Require(x.rows() == y.size(), ErrorCode::kDimensionMismatch, "evaluation rows do not match targets");
  Metrics out;
  out.task = model.spec().task;
  const Vector predicted = model.predict(x);
  if (model.is_classifier()) {
    const Matrix proba = model.predict_proba(x);
    out.classification = ClassificationScores(y, predicted, model.num_classes(), &proba);
  } else {
    out.regression = RegressionScores(y, predicted);
  }
  return out;
}

}  // namespace tabml::pipeline
