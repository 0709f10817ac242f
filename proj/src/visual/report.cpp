#include "tabml/visual/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "tabml/core/error.hpp"
#include "tabml/core/version.hpp"

namespace tabml::visual {

namespace {

using Json = nlohmann::json;
using pipeline::RunResult;

Json OrNull(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string FeatureName(const RunResult& r, std::size_t f) {
  return f < r.dataset.feature_names.size() ? r.dataset.feature_names[f] : "x" + std::to_string(f);
}

std::string ClassName(const RunResult& r, std::size_t c) {
  return c < r.dataset.classes.size() ? r.dataset.classes[c] : std::to_string(c);
}

bool IsBinary(const RunResult& r) {
  return r.config.task == data::Task::kClassification && r.dataset.classes.size() == 2;
}

const pipeline::ModelEntry* Winner(const RunResult& r) {
  return r.winner && *r.winner < r.models.size() ? &r.models[*r.winner] : nullptr;
}

Json DatasetJson(const RunResult& r) {
  const auto& d = r.dataset;
  Json missing = Json::object();
  for (const auto& c : d.schema.columns) missing[c.name] = c.missing_count;
  Json shapes = Json::array();
  for (std::size_t f = 0; f < d.shapes.size(); ++f) {
    if (d.shapes[f]) {
      shapes.push_back({{"feature", FeatureName(r, f)},
                        {"skewness", d.shapes[f]->skewness},
                        {"excess_kurtosis", d.shapes[f]->excess_kurtosis}});
    } else {
      shapes.push_back({{"feature", FeatureName(r, f)}, {"skewness", nullptr}, {"excess_kurtosis", nullptr}});
    }
  }
  return {{"source", d.source},
          {"raw_rows", d.raw_rows},
          {"rows", d.rows},
          {"dropped_rows", d.raw_rows - std::min(d.raw_rows, d.rows)},
          {"schema", data::ToJson(d.schema)},
          {"missing_counts", missing},
          {"feature_names", d.feature_names},
          {"classes", d.classes},
          {"correlation", {{"method", "pearson"}, {"features", d.feature_names}, {"matrix", stats::ToJson(d.correlation)}}},
          {"shapes", shapes}};
}

Json ModelsJson(const RunResult& r) {
  Json out = Json::array();
  for (const auto& m : r.models) {
    out.push_back({{"name", m.spec.name()},
                   {"status", pipeline::ModelStatusName(m.status)},
                   {"error", m.error.empty() ? Json(nullptr) : Json(m.error)},
                   {"params", m.spec.params},
                   {"seed", m.spec.seed},
                   {"metrics", m.metrics ? pipeline::ToJson(*m.metrics) : Json(nullptr)},
                   {"tuning", m.tuning ? pipeline::ToJson(*m.tuning) : Json(nullptr)},
                   {"loss_trace", m.loss_trace},
                   {"seconds", nullptr}});
  }
  return out;
}

Json WinnerJson(const RunResult& r) {
  const auto* w = Winner(r);
  if (!w) return nullptr;
  return {{"name", w->spec.name()},
          {"params", w->spec.params},
          {"seed", w->spec.seed},
          {"test_metrics", w->metrics ? pipeline::ToJson(*w->metrics) : Json(nullptr)},
          {"final_metrics", r.final_train_metrics ? pipeline::ToJson(*r.final_train_metrics) : Json(nullptr)}};
}

Json ExplanationsJson(const RunResult& r) {
  const auto& e = r.explanations;
  Json out = Json::array();
  if (!e.pdp.empty()) {
    Json curves = Json::array();
    for (const auto& c : e.pdp) {
      Json j = explain::ToJson(c);
      j["feature_name"] = FeatureName(r, c.feature);
      curves.push_back(std::move(j));
    }
    Json payload = {{"curves", curves}};
    payload["class"] = e.pdp_class ? Json(ClassName(r, *e.pdp_class)) : Json(nullptr);
    out.push_back({{"method", "pdp"}, {"payload", payload}});
  }
  if (!e.shap.empty()) {
    Json items = Json::array();
    for (const auto& s : e.shap) {
      Json j = explain::ToJson(s.shap);
      j["row"] = s.row;
      j["class"] = r.dataset.classes.empty() ? Json(nullptr) : Json(ClassName(r, s.output_class));
      items.push_back(std::move(j));
    }
    out.push_back({{"method", "shap"}, {"payload", {{"feature_names", r.dataset.feature_names}, {"items", items}}}});
  }
  if (e.lime) {
    Json j = explain::ToJson(e.lime->lime);
    j["row"] = e.lime->row;
    j["class"] = r.dataset.classes.empty() ? Json(nullptr) : Json(ClassName(r, e.lime->output_class));
    j["feature_names"] = r.dataset.feature_names;
    out.push_back({{"method", "lime"}, {"payload", j}});
  }
  if (e.counterfactual) {
    Json j = explain::ToJson(e.counterfactual->counterfactual);
    j["row"] = e.counterfactual->row;
    j["misclassified"] = e.counterfactual->misclassified;
    j["feature_names"] = r.dataset.feature_names;
    out.push_back({{"method", "counterfactual"}, {"payload", j}});
  }
  return out;
}

Json ClusterSpecJson(const unsupervised::ClusterSpec& s) {
  Json j = {{"seed", s.seed}};
  switch (s.algorithm) {
    case unsupervised::ClusterAlgorithm::kDbscan:
      j["eps"] = s.eps;
      j["min_pts"] = s.min_pts;
      break;
    case unsupervised::ClusterAlgorithm::kAgglomerative:
      j["k"] = s.k;
      j["linkage"] = unsupervised::LinkageName(s.linkage);
      break;
    default:
      j["k"] = s.k;
  }
  return j;
}

Json ClusteringJson(const RunResult& r) {
  if (r.clusters.empty()) return nullptr;
  Json algs = Json::array();
  for (const auto& c : r.clusters) {
    Json scores = Json::array();
    for (const auto& [k, s] : c.k_scores) scores.push_back({{"k", k}, {"silhouette", OrNull(s)}});
    const bool ok = c.status == pipeline::ModelStatus::kOk;
    algs.push_back({{"name", unsupervised::ClusterAlgorithmName(c.spec.algorithm)},
                    {"status", pipeline::ModelStatusName(c.status)},
                    {"error", c.error.empty() ? Json(nullptr) : Json(c.error)},
                    {"params", ClusterSpecJson(c.spec)},
                    {"silhouette", OrNull(c.silhouette)},
                    {"inertia", ok ? Json(c.inertia) : Json(nullptr)},
                    {"k_scores", scores},
                    {"result", ok ? unsupervised::ToJson(c.result) : Json(nullptr)},
                    {"seconds", nullptr}});
  }
  Json best = nullptr;
  if (r.best_cluster) best = unsupervised::ClusterAlgorithmName(r.clusters[*r.best_cluster].spec.algorithm);
  return {{"best", best}, {"algorithms", algs}};
}

}  // namespace

std::vector<PlotArtifact> RenderPlots(const RunResult& r, std::vector<std::string>& notes) {
  std::vector<PlotArtifact> plots;
  auto attempt = [&](PlotKind kind, auto&& build) {
    try {
      plots.push_back(build());
    } catch (const Error& e) {
      notes.push_back(std::string(PlotKindName(kind)) + " omitted: " + e.what());
    }
  };
  const auto* w = Winner(r);

  if (w && w->metrics && w->metrics->classification) {
    attempt(PlotKind::kConfusionHeatmap, [&] {
      const auto& cm = w->metrics->classification->confusion;
      std::vector<std::string> labels;
      std::vector<std::vector<std::optional<double>>> cells;
      double hi = 0.0;
      for (std::size_t i = 0; i < cm.size(); ++i) {
        labels.push_back(ClassName(r, i));
        cells.emplace_back();
        for (std::size_t v : cm[i]) {
          cells.back().push_back(static_cast<double>(v));
          hi = std::max(hi, static_cast<double>(v));
        }
      }
      return Heatmap(PlotKind::kConfusionHeatmap, "Confusion matrix: " + w->spec.name() + " (test split)", labels,
                     labels, cells, 0.0, hi, "predicted class", "true class");
    });
  }

  if (IsBinary(r) && w && w->metrics && w->metrics->classification) {
    if (!w->metrics->classification->auc || r.roc.empty()) {
      notes.push_back("roc_curve omitted: AUC undefined on the test split");
    } else {
      attempt(PlotKind::kRocCurve, [&] {
        Series s{w->spec.name() + " (AUC " + FormatTick(*w->metrics->classification->auc) + ")", {}, {}};
        for (const auto& p : r.roc) {
          s.x.push_back(p.fpr);
          s.y.push_back(p.tpr);
        }
        return LinePlot(PlotKind::kRocCurve, "ROC curve, positive class " + ClassName(r, 1),
                        "false positive rate", "true positive rate", {s});
      });
    }
  }

  if (r.pca_scatter) {
    attempt(PlotKind::kPcaScatter, [&] {
      const auto& s = *r.pca_scatter;
      return ScatterPlot(PlotKind::kPcaScatter, "PCA projection", s.axis_names.at(0), s.axis_names.at(1), s.points,
                         s.groups, r.dataset.classes);
    });
  }

  if (r.cluster_scatter && r.best_cluster) {
    attempt(PlotKind::kClusterScatter, [&] {
      const auto& s = *r.cluster_scatter;
      const auto& best = r.clusters[*r.best_cluster];
      const std::string name(unsupervised::ClusterAlgorithmName(best.spec.algorithm));
      std::vector<std::string> names;
      for (std::size_t k = 0; k < best.result.n_clusters; ++k) names.push_back("cluster " + std::to_string(k));
      return ScatterPlot(PlotKind::kClusterScatter, "Clusters (" + name + ") on the PCA projection",
                         s.axis_names.at(0), s.axis_names.at(1), s.points, s.groups, names);
    });
  }

  if (!r.explanations.pdp.empty()) {
    attempt(PlotKind::kPdpCurve, [&] {
      std::vector<Series> series;
      for (const auto& c : r.explanations.pdp) series.push_back({FeatureName(r, c.feature), c.grid, c.values});
      std::string y = "mean prediction";
      if (r.explanations.pdp_class) y = "mean probability of " + ClassName(r, *r.explanations.pdp_class);
      return LinePlot(PlotKind::kPdpCurve, "Partial dependence", "feature value (model input units)", y, series);
    });
  }

  if (!r.dataset.correlation.empty()) {
    attempt(PlotKind::kCorrelationHeatmap, [&] {
      return Heatmap(PlotKind::kCorrelationHeatmap, "Pearson correlation of encoded features",
                     r.dataset.feature_names, r.dataset.feature_names, r.dataset.correlation, -1.0, 1.0, "feature",
                     "feature");
    });
  }

  if (!r.explanations.shap.empty()) {
    attempt(PlotKind::kShapBar, [&] {
      const std::size_t p = r.explanations.shap.front().shap.values.size();
      Vector mean(p, 0.0);
      for (const auto& s : r.explanations.shap) {
        Require(s.shap.values.size() == p, ErrorCode::kIncompatibleSeries, "shap items differ in length");
        for (std::size_t j = 0; j < p; ++j) mean[j] += std::abs(s.shap.values[j]);
      }
      for (double& v : mean) v /= static_cast<double>(r.explanations.shap.size());
      std::vector<std::size_t> order(p);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
      std::vector<std::string> labels;
      Vector values;
      for (std::size_t j : order) {
        labels.push_back(FeatureName(r, j));
        values.push_back(mean[j]);
      }
      return BarPlot(PlotKind::kShapBar,
                     "Mean |SHAP| over " + std::to_string(r.explanations.shap.size()) + " explained rows", "mean |SHAP|",
                     labels, values);
    });
  }

  std::vector<Series> losses;
  for (const auto& m : r.models) {
    if (m.loss_trace.empty()) continue;
    Series s{m.spec.name(), {}, m.loss_trace};
    for (std::size_t i = 0; i < m.loss_trace.size(); ++i) s.x.push_back(static_cast<double>(i + 1));
    losses.push_back(std::move(s));
  }
  if (!losses.empty()) {
    attempt(PlotKind::kLossCurve,
            [&] { return LinePlot(PlotKind::kLossCurve, "Training loss", "epoch or stage", "loss", losses); });
  }
  return plots;
}

Report RenderReport(const RunResult& r, const std::string& log_path) {
  Report out;
  std::vector<std::string> notes = r.explanations.notes;
  out.plots = RenderPlots(r, notes);

  Json plots = Json::array();
  for (const auto& p : out.plots) {
    plots.push_back({{"kind", PlotKindName(p.kind)},
                     {"path", "plots/" + std::string(PlotKindName(p.kind)) + ".svg"},
                     {"caption", p.caption}});
  }
  Json& d = out.document;
  d["version"] = kVersion;
  d["run_id"] = r.run_id;
  d["task"] = data::TaskName(r.config.task);
  d["config"] = pipeline::ToJson(r.config);
  d["dataset"] = DatasetJson(r);
  d["preprocessing"] = r.preprocessing;
  d["models"] = ModelsJson(r);
  d["winner"] = WinnerJson(r);
  Json roc = Json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  d["roc"] = roc;
  d["explanations"] = ExplanationsJson(r);
  d["clustering"] = ClusteringJson(r);
  d["projection"] = r.projection ? unsupervised::ToJson(*r.projection) : Json(nullptr);
  d["plots"] = plots;
  d["log_path"] = log_path;
  d["reproducibility"] = {{"seed", r.config.seed}, {"config_hash", pipeline::ConfigHash(r.config)}, {"version", kVersion}};
  d["notes"] = notes;
  return out;
}

Json ModelDocument(const RunResult& r) {
  if (!r.final_model) return nullptr;
  return {{"version", kVersion},
          {"run_id", r.run_id},
          {"feature_names", r.dataset.feature_names},
          {"classes", r.dataset.classes},
          {"preprocessing", r.final_preprocessing ? pipeline::ToJson(*r.final_preprocessing) : Json(nullptr)},
          {"model", r.final_model->to_json()}};
}

namespace {

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  Require(static_cast<bool>(f), ErrorCode::kInternal, "cannot write " + path.string());
  f << text;
  Require(static_cast<bool>(f), ErrorCode::kInternal, "write failed for " + path.string());
}

}  // namespace

ReportFiles WriteReport(const Report& report, const RunResult& result, const std::filesystem::path& out_dir) {
  ReportFiles files;
  std::filesystem::create_directories(out_dir / "plots");
  files.report = out_dir / "report.json";
  WriteFile(files.report, report.document.dump(2) + "\n");
  for (const auto& p : report.plots) {
    files.plots.push_back(out_dir / "plots" / (std::string(PlotKindName(p.kind)) + ".svg"));
    WriteFile(files.plots.back(), p.svg);
  }
  const Json model = ModelDocument(result);
  if (!model.is_null()) {
    files.model = out_dir / "model.json";
    WriteFile(*files.model, model.dump(2) + "\n");
  }
  return files;
}

std::vector<std::string> ValidateReport(const Json& report) {
  std::vector<std::string> errors;
  auto need = [&](const Json& obj, const std::string& key, auto check, const std::string& what,
                  const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      errors.push_back(where + key + ": missing");
    } else if (!check(obj.at(key))) {
      errors.push_back(where + key + ": expected " + what);
    }
  };
  auto is_string = [](const Json& j) { return j.is_string(); };
  auto is_object = [](const Json& j) { return j.is_object(); };
  auto is_array = [](const Json& j) { return j.is_array(); };
  auto object_or_null = [](const Json& j) { return j.is_object() || j.is_null(); };
  if (!report.is_object()) return {"report: expected object"};

  need(report, "version", is_string, "string", "");
  need(report, "run_id", is_string, "string", "");
  need(report, "config", is_object, "object", "");
  need(report, "dataset", is_object, "object", "");
  need(report, "preprocessing", is_array, "array", "");
  need(report, "models", is_array, "array", "");
  need(report, "winner", object_or_null, "object or null", "");
  need(report, "explanations", is_array, "array", "");
  need(report, "plots", is_array, "array", "");
  need(report, "log_path", is_string, "string", "");
  need(report, "reproducibility", is_object, "object", "");
  if (!errors.empty()) return errors;

  const Json& ds = report["dataset"];
  need(ds, "rows", [](const Json& j) { return j.is_number_unsigned(); }, "count", "dataset.");
  need(ds, "schema", is_object, "object", "dataset.");
  need(ds, "missing_counts", is_object, "object", "dataset.");
  need(ds, "correlation", is_object, "object", "dataset.");

  std::vector<std::string> seen;
  for (std::size_t i = 0; i < report["models"].size(); ++i) {
    const Json& m = report["models"][i];
    const std::string where = "models[" + std::to_string(i) + "].";
    need(m, "name", is_string, "string", where);
    need(m, "params", is_object, "object", where);
    need(m, "metrics", object_or_null, "object or null", where);
    need(m, "status", is_string, "string", where);
    if (!m.contains("seconds")) errors.push_back(where + "seconds: missing");
    if (m.contains("name") && m["name"].is_string()) {
      const std::string name = m["name"];
      if (std::find(seen.begin(), seen.end(), name) != seen.end()) errors.push_back(where + "name: duplicate " + name);
      seen.push_back(name);
    }
  }
  if (report["winner"].is_object()) {
    need(report["winner"], "name", is_string, "string", "winner.");
    need(report["winner"], "final_metrics", object_or_null, "object or null", "winner.");
  }
  for (std::size_t i = 0; i < report["explanations"].size(); ++i) {
    const std::string where = "explanations[" + std::to_string(i) + "].";
    need(report["explanations"][i], "method", is_string, "string", where);
    need(report["explanations"][i], "payload", is_object, "object", where);
  }
  for (std::size_t i = 0; i < report["plots"].size(); ++i) {
    const std::string where = "plots[" + std::to_string(i) + "].";
    need(report["plots"][i], "kind", is_string, "string", where);
    need(report["plots"][i], "path", is_string, "string", where);
  }
  const Json& rep = report["reproducibility"];
  need(rep, "seed", [](const Json& j) { return j.is_number_unsigned(); }, "unsigned integer", "reproducibility.");
  need(rep, "config_hash", is_string, "string", "reproducibility.");
  need(rep, "version", is_string, "string", "reproducibility.");
  return errors;
}

}  // namespace tabml::visual
