#include "tabml/pipeline/tuning.hpp"

#include <limits>
#include <numeric>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/pipeline/metrics.hpp"
#include "tabml/pipeline/split.hpp"

namespace tabml::pipeline {

std::vector<ParamSet> GridCandidates(const ParamGrid& grid) {
  std::vector<ParamSet> out = {{}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) continue;
    std::vector<ParamSet> next;
    for (const auto& partial : out) {
      for (double v : values) {
        ParamSet p = partial;
        p[name] = v;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

nlohmann::json ToJson(const TuneResult& result) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : result.candidates) {
    candidates.push_back({{"params", c.params}, {"fold_scores", c.fold_scores}, {"mean_score", c.mean_score}});
  }
  return {{"folds", result.folds},
          {"best_index", result.best_index},
          {"best_params", result.best.params},
          {"candidates", candidates}};
}

Vector CrossValidate(const models::ModelSpec& spec, const Matrix& x, std::span<const double> y,
                     std::size_t num_classes, const CvOptions& options) {
  Require(x.rows() == y.size(), ErrorCode::kDimensionMismatch, "cross-validation rows mismatch");
  const bool classification = spec.task == data::Task::kClassification;
  const auto fold = FoldAssignment(x.rows(), classification ? y : std::span<const double>{},
                                   options.folds, options.seed);
  Vector scores;
  for (std::size_t f = 0; f < options.folds; ++f) {
    CheckDeadline();
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? valid : train).push_back(i);
    Matrix xt = x.select_rows(train);
    Vector yt;
    for (std::size_t i : train) yt.push_back(y[i]);
    Matrix xv = x.select_rows(valid);
    Vector yv;
    for (std::size_t i : valid) yv.push_back(y[i]);
    if (options.preprocessing != nullptr) {
      auto prepared = PrepareTraining(*options.preprocessing, xt, yt, options.origins, spec.task,
                                      DeriveSeed(options.seed, f + 1));
      xv = prepared.fitted.Apply(xv);
      xt = std::move(prepared.x);
      yt = std::move(prepared.y);
    }
    const models::ModelPtr model = models::Fit(spec, xt, yt, num_classes);
    scores.push_back(Evaluate(*model, xv, yv).primary());
  }
  return scores;
}

TuneResult GridSearch(const models::ModelSpec& base, const ParamGrid& grid, const Matrix& x,
                      std::span<const double> y, std::size_t num_classes, const CvOptions& options) {
  TuneResult out;
  out.folds = options.folds;
  const auto candidates = GridCandidates(grid);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    models::ModelSpec spec = base;
    for (const auto& [name, value] : candidates[c]) spec.params[name] = value;
    CandidateScore score;
    score.params = candidates[c];
    score.fold_scores = CrossValidate(spec, x, y, num_classes, options);
    score.mean_score = std::accumulate(score.fold_scores.begin(), score.fold_scores.end(), 0.0) /
                       static_cast<double>(score.fold_scores.size());
    if (score.mean_score > best) {
      best = score.mean_score;
      out.best = spec;
      out.best_index = c;
    }
    out.candidates.push_back(std::move(score));
  }
  return out;
}

}  // namespace tabml::pipeline
