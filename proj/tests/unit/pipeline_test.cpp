#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/pipeline/config.hpp"
#include "tabml/pipeline/metrics.hpp"
#include "tabml/pipeline/split.hpp"
#include "tabml/pipeline/tuning.hpp"
#include "test_util.hpp"

namespace tabml::pipeline {
namespace {

using testing::Blobs;

TEST(Split, SizesAndPartition) {
  const Split s = TrainTestSplit(8, {}, {0.25, false, 3});
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.test.size(), 2u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(8);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
}

TEST(Split, StratifiedHalves) {
  const Vector y = {0, 1, 0, 1, 0, 1, 0, 1};
  const Split s = TrainTestSplit(8, y, {0.5, true, 1});
  std::size_t ones = 0;
  for (std::size_t r : s.test) ones += y[r] == 1.0;
  EXPECT_EQ(s.test.size(), 4u);
  EXPECT_EQ(ones, 2u);
}

TEST(Split, SeedDeterminism) {
  const Vector y = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  const Split a = TrainTestSplit(12, y, {0.25, true, 9});
  const Split b = TrainTestSplit(12, y, {0.25, true, 9});
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train, b.train);
}

TEST(Split, StratifiedProportionsProperty) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 10 + rng.index(80);
    Vector y(n);
    for (double& v : y) v = static_cast<double>(rng.index(3));
    y[0] = 0;
    y[1] = 1;
    y[2] = 2;
    const double frac = 0.1 + 0.8 * rng.uniform();
    const Split s = TrainTestSplit(n, y, {frac, true, seed});
    std::multiset<std::size_t> rows(s.train.begin(), s.train.end());
    rows.insert(s.test.begin(), s.test.end());
    ASSERT_EQ(rows.size(), n);
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), n);
    for (int c = 0; c < 3; ++c) {
      const double total = static_cast<double>(std::count(y.begin(), y.end(), c));
      double in_test = 0;
      for (std::size_t r : s.test) in_test += y[r] == c;
      if (total > 1) EXPECT_LE(std::abs(in_test - total * frac), 1.0);
    }
  }
}

TEST(Split, SingletonStratumStaysInTrain) {
  const Vector y = {0, 0, 0, 0, 0, 1};
  const Split s = TrainTestSplit(6, y, {0.5, true, 0});
  EXPECT_NE(std::find(s.train.begin(), s.train.end(), 5u), s.train.end());
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("StratumTooSmall"), std::string::npos);
}

TEST(Split, TooFewRows) {
  try {
    TrainTestSplit(3, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRows);
  }
}

TEST(Folds, StratifiedPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 30 + rng.index(50);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 3);
    const auto fold = FoldAssignment(n, y, 5, seed);
    for (int c = 0; c < 3; ++c) {
      std::vector<std::size_t> per(5, 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] == c) ++per[fold[i]];
      }
      const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
  }
}

TEST(Folds, InsufficientRows) {
  const Vector y = {0, 0, 0, 0, 0, 1, 1};
  try {
    FoldAssignment(7, y, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientRowsForFolds);
  }
}

// AUC as the fraction of (positive, negative) pairs ranked correctly.
double PairCountAuc(const Vector& s, const Vector& y) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

TEST(Metrics, AucMatchesPairCounting) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(40);
    Vector s(n);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(6)) / 5.0;
      y[i] = static_cast<double>(rng.index(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(*RankAuc(s, y), PairCountAuc(s, y)) << seed;
  }
}

TEST(Metrics, AucTiesAndSingleClass) {
  EXPECT_EQ(*RankAuc(Vector{0.3, 0.3, 0.3, 0.3}, Vector{0, 1, 0, 1}), 0.5);
  EXPECT_FALSE(RankAuc(Vector{0.1, 0.9}, Vector{1, 1}).has_value());
}

TEST(Metrics, RocOfPerfectScores) {
  const auto roc = RocCurve(Vector{0.9, 0.8, 0.2, 0.1}, Vector{1, 1, 0, 0});
  bool corner = false;
  for (const auto& p : roc) corner |= p.fpr == 0.0 && p.tpr == 1.0;
  EXPECT_TRUE(corner);
  EXPECT_EQ(roc.back().fpr, 1.0);
  EXPECT_EQ(roc.back().tpr, 1.0);
}

TEST(Metrics, PerfectClassification) {
  const Vector y = {0, 1, 2, 1, 0};
  const auto m = ClassificationScores(y, y, 3);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_EQ(m.confusion[i][j], 0u);
    }
  }
}

TEST(Metrics, MacroAveragesWithEmptyClass) {
  // Class 2 is never predicted nor present: its precision and recall are 0/0 = 0.
  const Vector y = {0, 0, 1, 1};
  const Vector p = {0, 1, 1, 1};
  const auto m = ClassificationScores(y, p, 3);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.precision, (1.0 + 2.0 / 3.0 + 0.0) / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, (0.5 + 1.0 + 0.0) / 3.0);
  std::size_t total = 0;
  for (const auto& row : m.confusion) total += std::accumulate(row.begin(), row.end(), std::size_t{0});
  EXPECT_EQ(total, 4u);
}

TEST(Metrics, Regression) {
  const auto m = RegressionScores(Vector{1, 2, 3}, Vector{1, 2, 3});
  EXPECT_EQ(m.mse, 0.0);
  EXPECT_EQ(m.r2, 1.0);
  const auto n = RegressionScores(Vector{1, 2, 3}, Vector{2, 2, 2});
  EXPECT_DOUBLE_EQ(n.mse, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(n.mae, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(n.r2, 0.0);
}

TEST(Tuning, CartesianOrder) {
  const auto c = GridCandidates({{"a", {1, 2}}, {"b", {10, 20, 30}}});
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c[0].at("a"), 1);
  EXPECT_EQ(c[0].at("b"), 10);
  EXPECT_EQ(c[1].at("b"), 20);
  EXPECT_EQ(c[3].at("a"), 2);
  EXPECT_EQ(GridCandidates({}).size(), 1u);
}

models::ModelSpec KnnSpec(std::size_t n) {
  return models::Catalog::Default().DefaultSpec(models::Algorithm::kKnn, models::Task::kClassification, n, 2, 0);
}

TEST(Tuning, SingleCandidate) {
  auto [x, y] = Blobs({{0, 0}, {5, 5}}, 20, 0.5, 1);
  const TuneResult t = GridSearch(KnnSpec(40), {{"k", {3}}}, x, y, 2, {});
  EXPECT_EQ(t.best.param("k"), 3);
  ASSERT_EQ(t.candidates.size(), 1u);
  EXPECT_EQ(t.candidates[0].fold_scores.size(), 5u);
}

TEST(Tuning, KnnOnSeparatedBlobs) {
  auto [x, y] = Blobs({{0, 0}, {50, 50}}, 20, 0.5, 2);
  // Every training portion of 5-fold CV over 40 rows holds 32 rows.
  const double n_train = static_cast<double>(x.rows() * 4 / 5);
  const TuneResult t = GridSearch(KnnSpec(40), {{"k", {1, n_train}}}, x, y, 2, {5, 3});
  EXPECT_EQ(t.candidates[0].mean_score, 1.0);
  EXPECT_LE(t.candidates[1].mean_score, 1.0);
  EXPECT_EQ(t.best_index, 0u);
  EXPECT_EQ(t.best.param("k"), 1);
}

TEST(Tuning, FirstOptimumWins) {
  auto [x, y] = Blobs({{0, 0}, {50, 50}}, 20, 0.5, 2);
  const TuneResult t = GridSearch(KnnSpec(40), {{"k", {3, 1}}}, x, y, 2, {});
  EXPECT_EQ(t.candidates[0].mean_score, t.candidates[1].mean_score);
  EXPECT_EQ(t.best.param("k"), 3);
}

TEST(Tuning, InsufficientRowsForFolds) {
  auto [x, y] = Blobs({{0, 0}, {5, 5}}, 3, 0.5, 1);
  EXPECT_THROW(GridSearch(KnnSpec(6), {{"k", {1}}}, x, y, 2, {5, 0}), Error);
}

nlohmann::json Base() {
  return {{"task", "classification"}, {"dataset_id", "d1"}, {"target", "y"}};
}

TEST(Config, DefaultsAndRoundTrip) {
  const RunConfig c = RunConfigFromJson(Base());
  EXPECT_EQ(c.test_fraction, 0.25);
  EXPECT_EQ(c.folds, 5u);
  EXPECT_TRUE(c.tuning_enabled);
  EXPECT_EQ(c.preprocessing.oversample, OversampleChoice::kAuto);
  const RunConfig again = RunConfigFromJson(ToJson(c));
  EXPECT_EQ(ToJson(again), ToJson(c));
  EXPECT_EQ(ConfigHash(again), ConfigHash(c));
}

TEST(Config, FullDocument) {
  nlohmann::json j = Base();
  j["inputs"] = {"a", "b"};
  j["models"] = {"knn", "svm"};
  j["preprocessing"] = {{"scaler", "robust"}, {"oversample", "smote"}};
  j["split"] = {{"test_fraction", 0.3}, {"seed", 42}};
  j["tuning"] = {{"enabled", false}, {"folds", 3}};
  j["notify"] = {{"mode", "file"}, {"address", "out"}};
  const RunConfig c = RunConfigFromJson(j);
  EXPECT_EQ(c.inputs.size(), 2u);
  EXPECT_EQ(c.preprocessing.scaler, preprocess::ScalerMethod::kRobust);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_FALSE(c.tuning_enabled);
  EXPECT_EQ(c.notify->mode, "file");
}

bool HasField(const ConfigParse& p, const std::string& field) {
  return std::any_of(p.errors.begin(), p.errors.end(), [&](const auto& e) { return e.field == field; });
}

TEST(Config, FieldErrors) {
  nlohmann::json j = Base();
  j.erase("target");
  EXPECT_TRUE(HasField(ParseRunConfig(j), "target"));
  j = Base();
  j["models"] = {"frobnicate"};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "models"));
  j = Base();
  j["models"] = {"linear_regression"};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "models"));
  j = Base();
  j["split"] = {{"test_fraction", 1.0}};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "split.test_fraction"));
  j = Base();
  j["tuning"] = {{"folds", 1}};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "tuning.folds"));
  j = Base();
  j["preprocessing"] = {{"scaler", "magic"}};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "preprocessing.scaler"));
  j = Base();
  j["notify"] = {{"mode", "email"}, {"address", "a@b"}};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "notify.mode"));
  j = Base();
  j["inputs"] = {"y"};
  EXPECT_TRUE(HasField(ParseRunConfig(j), "inputs"));
  j = Base();
  j["bogus"] = 1;
  EXPECT_TRUE(HasField(ParseRunConfig(j), "bogus"));
  EXPECT_TRUE(HasField(ParseRunConfig(nlohmann::json::array()), ""));
  try {
    RunConfigFromJson({{"task", "classification"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find("target"), std::string::npos);
  }
}

TEST(Config, UnsupervisedNeedsNoTarget) {
  const ConfigParse p = ParseRunConfig({{"task", "clustering"}, {"dataset_id", "d"}, {"models", {"kmeans", "gmm"}}});
  ASSERT_TRUE(p.errors.empty());
  EXPECT_EQ(p.config->task, data::Task::kUnsupervised);
  EXPECT_TRUE(HasField(ParseRunConfig({{"task", "unsupervised"}, {"dataset_id", "d"}, {"models", {"svm"}}}),
                       "models"));
}

TEST(Config, CheckColumns) {
  data::Schema s;
  s.columns.push_back({"a"});
  s.columns.push_back({"y"});
  RunConfig c = RunConfigFromJson(Base());
  EXPECT_TRUE(CheckColumns(c, s).empty());
  c.target = "zzz";
  c.inputs = {"a", "q"};
  EXPECT_EQ(CheckColumns(c, s).size(), 2u);
}

}  // namespace
}  // namespace tabml::pipeline
