#include <algorithm>
#include <chrono>
#include <set>

#include <gtest/gtest.h>

#include "tabml/data/table.hpp"
#include "tabml/pipeline/run.hpp"

namespace tabml::pipeline {
namespace {

const data::RawTable& Demo() {
  static const data::RawTable table = data::ReadTable(TABML_DATA_DIR "/demo.csv");
  return table;
}

RunConfig Config(const nlohmann::json& extra) {
  nlohmann::json j = {{"task", "classification"}, {"dataset_id", "demo"}, {"target", "outcome"}};
  j.update(extra);
  return RunConfigFromJson(j);
}

std::set<std::string> Stages(const visual::RunLog& log) {
  std::set<std::string> out;
  for (const auto& r : log.records()) out.insert(r.stage);
  return out;
}

TEST(RunPipeline, ClassificationOnDemo) {
  visual::RunLog log("t1");
  const RunResult r = RunPipeline(Config(nlohmann::json::object()), Demo(), log);
  ASSERT_EQ(r.models.size(), 7u);
  ASSERT_TRUE(r.winner.has_value());
  for (const auto& m : r.models) {
    ASSERT_EQ(m.status, ModelStatus::kOk) << m.error;
    EXPECT_GE(m.metrics->primary(), r.models[0].metrics->primary() - 1.0);
    EXPECT_LE(m.metrics->primary(), r.models[*r.winner].metrics->primary());
  }
  EXPECT_EQ(r.dataset.rows, 236u);
  EXPECT_EQ(r.explanations.shap.size(), 5u);
  EXPECT_EQ(r.explanations.pdp.size(), 4u);
  EXPECT_TRUE(r.explanations.lime.has_value());
  EXPECT_TRUE(r.explanations.counterfactual.has_value());
  EXPECT_FALSE(r.roc.empty());
  for (const auto& s : r.explanations.shap) {
    double sum = s.shap.baseline;
    for (double v : s.shap.values) sum += v;
    EXPECT_NEAR(sum, s.shap.output, 1e-6);
  }
  const auto stages = Stages(log);
  for (auto s : {kStageSchema, kStageSanitize, kStageEncode, kStageSplit, kStagePreprocess,
                 kStageGetModels, kStageTrain, kStageRetrain, kStageExplain}) {
    EXPECT_TRUE(stages.count(std::string(s))) << s;
  }
  const auto records = log.records();
  for (std::size_t i = 1; i < records.size(); ++i) EXPECT_LE(records[i - 1].timestamp, records[i].timestamp);
}

TEST(RunPipeline, RegressionBranch) {
  visual::RunLog log("t2");
  const RunResult r = RunPipeline(
      Config({{"task", "regression"}, {"target", "spend"}, {"models", {"linear_regression", "knn"}}}), Demo(), log);
  ASSERT_EQ(r.models.size(), 2u);
  EXPECT_GT(r.models[0].metrics->regression->r2, 0.8);
  EXPECT_TRUE(r.roc.empty());
  EXPECT_FALSE(r.explanations.counterfactual.has_value());
}

TEST(RunPipeline, UnsupervisedBranch) {
  visual::RunLog log("t3");
  const RunResult r = RunPipeline(
      RunConfigFromJson({{"task", "unsupervised"}, {"dataset_id", "demo"}, {"inputs", {"age", "income", "tenure"}}}),
      Demo(), log);
  EXPECT_TRUE(r.models.empty());
  EXPECT_FALSE(r.winner.has_value());
  ASSERT_EQ(r.clusters.size(), 4u);
  EXPECT_TRUE(r.best_cluster.has_value());
  ASSERT_TRUE(r.cluster_scatter.has_value());
  EXPECT_EQ(r.cluster_scatter->points.rows(), r.dataset.rows);
}

TEST(RunPipeline, UnknownTargetFailsInEncode) {
  visual::RunLog log("t4");
  try {
    RunPipeline(Config({{"target", "nope"}}), Demo(), log);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "encode");
    EXPECT_EQ(e.code(), ErrorCode::kTargetNotFound);
  }
  const auto records = log.records();
  ASSERT_FALSE(records.empty());
  EXPECT_EQ(records.back().level, visual::LogLevel::kError);
  EXPECT_EQ(records.back().stage, "encode");
}

TEST(RunPipeline, ModelTimeoutIsRecorded) {
  visual::RunLog log("t5");
  RunOptions options;
  options.model_timeout_seconds = 1e-6;
  try {
    RunPipeline(Config({{"models", {"mlp", "random_forest"}}}), Demo(), log, options);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "train");
    EXPECT_EQ(e.code(), ErrorCode::kTimedOut);
  }
}

}  // namespace
}  // namespace tabml::pipeline
