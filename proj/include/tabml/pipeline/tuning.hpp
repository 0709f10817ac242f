#ifndef TABML_PIPELINE_TUNING_HPP_
#define TABML_PIPELINE_TUNING_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/models/model.hpp"
#include "tabml/pipeline/preprocessing.hpp"

namespace tabml::pipeline {

using ParamGrid = std::map<std::string, std::vector<double>>;
using ParamSet = std::map<std::string, double>;

// Cartesian product in name order; the last name varies fastest.
std::vector<ParamSet> GridCandidates(const ParamGrid& grid);

struct CandidateScore {
  ParamSet params;
  Vector fold_scores;
  double mean_score = 0.0;
};

struct TuneResult {
  models::ModelSpec best;
  std::size_t best_index = 0;
  std::vector<CandidateScore> candidates;
  std::size_t folds = 0;
};

nlohmann::json ToJson(const TuneResult& result);

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  // Fitted on each training portion; null means the data is used as is.
  const PreprocessOptions* preprocessing = nullptr;
  std::span<const data::FeatureOrigin> origins;
};

// Mean validation score (accuracy or R^2) per fold for one spec.
Vector CrossValidate(const models::ModelSpec& spec, const Matrix& x, std::span<const double> y,
                     std::size_t num_classes, const CvOptions& options);

// k-fold grid search, stratified for classification. Every candidate sees
// the same folds; the first candidate with the highest mean score wins.
TuneResult GridSearch(const models::ModelSpec& base, const ParamGrid& grid, const Matrix& x,
                      std::span<const double> y, std::size_t num_classes, const CvOptions& options);

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_TUNING_HPP_
