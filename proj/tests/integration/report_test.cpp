#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tabml/data/table.hpp"
#include "tabml/pipeline/run.hpp"
#include "tabml/visual/report.hpp"
#include "xml_check.hpp"

namespace tabml::visual {
namespace {

using pipeline::RunResult;

const data::RawTable& Demo() {
  static const data::RawTable table = data::ReadTable(TABML_DATA_DIR "/demo.csv");
  return table;
}

RunResult RunDemo(const nlohmann::json& config_doc) {
  RunLog log("report");
  pipeline::RunOptions options;
  options.run_id = "report";
  return pipeline::RunPipeline(pipeline::RunConfigFromJson(config_doc), Demo(), log, options);
}

const RunResult& Binary() {
  static const RunResult r = RunDemo({{"task", "classification"}, {"dataset_id", "demo"}, {"target", "outcome"}});
  return r;
}

std::set<std::string> Kinds(const Report& report) {
  std::set<std::string> out;
  for (const auto& p : report.plots) out.insert(std::string(PlotKindName(p.kind)));
  return out;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(Report, BinaryClassificationHasRocAndConfusion) {
  const Report report = RenderReport(Binary());
  const auto kinds = Kinds(report);
  for (const char* k : {"roc_curve", "confusion_heatmap", "pca_scatter", "pdp_curve", "correlation_heatmap",
                        "shap_bar", "loss_curve"}) {
    EXPECT_TRUE(kinds.count(k)) << k;
  }
  EXPECT_FALSE(kinds.count("cluster_scatter"));
  EXPECT_EQ(ValidateReport(report.document), std::vector<std::string>{});
  for (const auto& p : report.plots) {
    EXPECT_EQ(testing::XmlProblem(p.svg), "") << PlotKindName(p.kind);
    EXPECT_EQ(p.svg.find("nan"), std::string::npos);
  }
  const auto& doc = report.document;
  EXPECT_EQ(doc["models"].size(), 7u);
  EXPECT_TRUE(doc["winner"].is_object());
  std::set<std::string> methods;
  for (const auto& e : doc["explanations"]) methods.insert(e["method"].get<std::string>());
  EXPECT_EQ(methods, (std::set<std::string>{"pdp", "shap", "lime", "counterfactual"}));
  EXPECT_EQ(doc["plots"].size(), report.plots.size());
  EXPECT_EQ(doc["reproducibility"]["config_hash"], pipeline::ConfigHash(Binary().config));
}

TEST(Report, EveryModelAppearsOnce) {
  const auto& doc = RenderReport(Binary()).document;
  std::multiset<std::string> names;
  for (const auto& m : doc["models"]) names.insert(m["name"].get<std::string>());
  for (const auto& m : Binary().models) EXPECT_EQ(names.count(m.spec.name()), 1u);
}

TEST(Report, MissingAucOmitsRocWithNote) {
  RunResult r = Binary();
  r.models[*r.winner].metrics->classification->auc.reset();
  const Report report = RenderReport(r);
  EXPECT_FALSE(Kinds(report).count("roc_curve"));
  bool noted = false;
  for (const auto& n : report.document["notes"]) noted |= n.get<std::string>().find("roc_curve") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(Report, MulticlassHasNoRoc) {
  const RunResult r = RunDemo({{"task", "classification"}, {"dataset_id", "demo"}, {"target", "region"},
                           {"models", {"logistic_regression", "naive_bayes"}}});
  const Report report = RenderReport(r);
  EXPECT_FALSE(Kinds(report).count("roc_curve"));
  EXPECT_TRUE(Kinds(report).count("confusion_heatmap"));
  EXPECT_EQ(ValidateReport(report.document), std::vector<std::string>{});
}

TEST(Report, ClusteringOnly) {
  const RunResult r = RunDemo({{"task", "clustering"}, {"dataset_id", "demo"}, {"inputs", {"age", "income", "spend"}}});
  const Report report = RenderReport(r);
  EXPECT_TRUE(Kinds(report).count("cluster_scatter"));
  EXPECT_FALSE(Kinds(report).count("confusion_heatmap"));
  EXPECT_TRUE(report.document["models"].empty());
  EXPECT_TRUE(report.document["winner"].is_null());
  EXPECT_TRUE(report.document["clustering"].is_object());
  EXPECT_EQ(ValidateReport(report.document), std::vector<std::string>{});
  EXPECT_TRUE(ModelDocument(r).is_null());
}

TEST(Report, WrittenFilesAreByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "tabml_report_test";
  std::filesystem::remove_all(dir);
  const RunResult again = RunDemo({{"task", "classification"}, {"dataset_id", "demo"}, {"target", "outcome"}});
  const auto a = WriteReport(RenderReport(Binary()), Binary(), dir / "a");
  const auto b = WriteReport(RenderReport(again), again, dir / "b");
  EXPECT_EQ(Slurp(a.report), Slurp(b.report));
  ASSERT_EQ(a.plots.size(), b.plots.size());
  for (std::size_t i = 0; i < a.plots.size(); ++i) EXPECT_EQ(Slurp(a.plots[i]), Slurp(b.plots[i]));
  ASSERT_TRUE(a.model && b.model);
  EXPECT_EQ(Slurp(*a.model), Slurp(*b.model));
  const auto model = nlohmann::json::parse(Slurp(*a.model));
  EXPECT_TRUE(model["preprocessing"].is_object());
  EXPECT_EQ(model["model"]["algorithm"], Binary().models[*Binary().winner].spec.name());
  std::filesystem::remove_all(dir);
}

TEST(ValidateReport, FlagsProblems) {
  auto doc = RenderReport(Binary()).document;
  doc.erase("reproducibility");
  EXPECT_FALSE(ValidateReport(doc).empty());
  doc = RenderReport(Binary()).document;
  doc["models"].push_back(doc["models"][0]);
  EXPECT_FALSE(ValidateReport(doc).empty());
}

}  // namespace
}  // namespace tabml::visual
