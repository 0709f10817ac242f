#ifndef TABML_PIPELINE_RUN_HPP_
#define TABML_PIPELINE_RUN_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/error.hpp"
#include "tabml/data/schema.hpp"
#include "tabml/data/table.hpp"
#include "tabml/explain/counterfactual.hpp"
#include "tabml/explain/lime.hpp"
#include "tabml/explain/pdp.hpp"
#include "tabml/explain/shap.hpp"
#include "tabml/models/model.hpp"
#include "tabml/pipeline/config.hpp"
#include "tabml/pipeline/metrics.hpp"
#include "tabml/pipeline/preprocessing.hpp"
#include "tabml/pipeline/tuning.hpp"
#include "tabml/stats/correlation.hpp"
#include "tabml/unsupervised/cluster.hpp"
#include "tabml/unsupervised/projection.hpp"
#include "tabml/visual/log.hpp"

namespace tabml::pipeline {

// A failure inside one pipeline stage. Keeps the original code; the message
// is prefixed with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& message)
      : Error(code, stage + ": " + message), stage_(std::move(stage)), detail_(message) {}

  const std::string& stage() const { return stage_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string stage_;
  std::string detail_;
};

enum class ModelStatus { kOk, kTimedOut, kFailed };

std::string_view ModelStatusName(ModelStatus status);

struct ModelEntry {
  models::ModelSpec spec;  // after tuning
  ModelStatus status = ModelStatus::kOk;
  std::string error;
  std::optional<TuneResult> tuning;
  std::optional<Metrics> metrics;  // held-out test split
  double seconds = 0.0;
  Vector loss_trace;               // mlp epochs or boosting stages
  models::ModelPtr model;          // fitted on the training split
};

struct DatasetSummary {
  std::string source;
  std::size_t raw_rows = 0;
  std::size_t rows = 0;  // after sanitize
  data::Schema schema;   // of the columns in use
  std::vector<std::string> feature_names;
  std::vector<std::string> classes;
  stats::CorrelationTable correlation;  // pearson over encoded features
  std::vector<std::optional<stats::Shape>> shapes;  // empty for constant features
};

struct ShapItem {
  std::size_t row = 0;  // sanitized row index
  std::size_t output_class = 0;
  explain::ShapValues shap;
};

struct LimeItem {
  std::size_t row = 0;
  std::size_t output_class = 0;
  explain::LimeExplanation lime;
};

struct CounterfactualItem {
  std::size_t row = 0;
  bool misclassified = true;  // false: fallback on a correctly classified row
  explain::Counterfactual counterfactual;
};

struct Explanations {
  std::optional<std::size_t> pdp_class;
  std::vector<explain::PdpCurve> pdp;
  std::vector<ShapItem> shap;
  std::optional<LimeItem> lime;
  std::optional<CounterfactualItem> counterfactual;
  std::vector<std::string> notes;
};

struct ClusterEntry {
  unsupervised::ClusterSpec spec;
  ModelStatus status = ModelStatus::kOk;
  std::string error;
  unsupervised::ClusterResult result;
  std::optional<double> silhouette;
  double inertia = 0.0;  // within-cluster squared distance, noise excluded
  std::vector<std::pair<std::size_t, std::optional<double>>> k_scores;  // k search
  double seconds = 0.0;
};

struct Scatter {
  Matrix points;            // n x 2
  std::vector<int> groups;  // class or cluster per point, -1 for none
  std::vector<std::string> axis_names;
};

struct RunResult {
  std::string run_id;
  RunConfig config;
  DatasetSummary dataset;
  std::vector<nlohmann::json> preprocessing;  // ordered trace
  std::vector<ModelEntry> models;
  std::optional<std::size_t> winner;
  models::ModelPtr final_model;
  std::optional<FittedPreprocessing> final_preprocessing;
  std::optional<Metrics> final_train_metrics;
  std::vector<RocPoint> roc;  // winner on the test split, binary only
  Explanations explanations;
  std::optional<unsupervised::ProjectionModel> projection;
  std::optional<Scatter> pca_scatter;
  std::vector<ClusterEntry> clusters;
  std::optional<std::size_t> best_cluster;  // highest silhouette
  std::optional<Scatter> cluster_scatter;
};

struct RunOptions {
  std::string run_id = "run";
  double model_timeout_seconds = 120.0;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// Stage names in execution order.
inline constexpr std::string_view kStageSchema = "schema";
inline constexpr std::string_view kStageSanitize = "sanitize";
inline constexpr std::string_view kStageEncode = "encode";
inline constexpr std::string_view kStageSplit = "split";
inline constexpr std::string_view kStagePreprocess = "preprocess";
inline constexpr std::string_view kStageGetModels = "get_models";
inline constexpr std::string_view kStageTrain = "train";
inline constexpr std::string_view kStageRetrain = "retrain";
inline constexpr std::string_view kStageExplain = "explain";
inline constexpr std::string_view kStageCluster = "cluster";
inline constexpr std::string_view kStageProject = "project";

// Runs the whole pipeline. Errors escape as StageError after an error record
// is logged.
RunResult RunPipeline(const RunConfig& config, const data::RawTable& table, visual::RunLog& log,
                      const RunOptions& options = {});

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_RUN_HPP_
