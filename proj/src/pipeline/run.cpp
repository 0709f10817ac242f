#include "tabml/pipeline/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

#include "tabml/core/deadline.hpp"
#include "tabml/core/random.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/models/tree.hpp"
#include "tabml/neural/mlp.hpp"
#include "tabml/explain/model_function.hpp"
#include "tabml/pipeline/split.hpp"

namespace tabml::pipeline {

std::string_view ModelStatusName(ModelStatus status) {
  switch (status) {
    case ModelStatus::kOk:
      return "ok";
    case ModelStatus::kTimedOut:
      return "timed_out";
    case ModelStatus::kFailed:
      return "failed";
  }
  return "ok";
}

namespace {

using Clock = std::chrono::steady_clock;
using Json = nlohmann::json;

constexpr std::size_t kShapInstances = 5;
constexpr std::size_t kShapBackground = 30;
constexpr std::size_t kPdpBackground = 200;
constexpr std::size_t kPdpFeatures = 4;

template <typename F>
auto RunStage(std::string_view stage, visual::RunLog& log, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    log.Error(stage, std::string(e.code_name()) + ": " + e.what());
    throw StageError(std::string(stage), e.code(), e.what());
  } catch (const std::exception& e) {
    log.Error(stage, std::string("Internal: ") + e.what());
    throw StageError(std::string(stage), ErrorCode::kInternal, e.what());
  }
}

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector Pick(std::span<const double> v, std::span<const std::size_t> rows) {
  Vector out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

// Up to `limit` of `rows`, chosen by a seeded shuffle, in ascending order.
std::vector<std::size_t> Subsample(std::vector<std::size_t> rows, std::size_t limit, std::uint64_t seed) {
  if (rows.size() > limit) {
    Rng rng(seed);
    rng.shuffle(rows);
    rows.resize(limit);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::size_t> AllRows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Vector RowOf(const Matrix& x, std::size_t r) { return Vector(x.row(r).begin(), x.row(r).end()); }

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <typename F>
void ParallelFor(std::size_t count, std::size_t threads, F&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, count));
  std::vector<std::future<void>> pool;
  for (std::size_t t = 1; t < n; ++t) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();
}

Vector LossTrace(const models::FittedModel& model) {
  switch (model.spec().algorithm) {
    case models::Algorithm::kMlp:
      return neural::MlpLossTrace(model);
    case models::Algorithm::kGradientBoosting:
      return models::BoostingLossTrace(model);
    default:
      return {};
  }
}

void SummarizeDataset(RunResult& r, const data::EncodedData& enc) {
  const Matrix& x = enc.features.values;
  r.dataset.feature_names = enc.features.feature_names;
  if (enc.labels && enc.labels->is_classification()) r.dataset.classes = enc.labels->classes();
  if (x.rows() >= 2) r.dataset.correlation = stats::CorrelationMatrix(x, stats::CorrelationMethod::kPearson);
  for (std::size_t c = 0; c < x.cols(); ++c) r.dataset.shapes.push_back(stats::DistributionShape(x.column(c)));
}

Scatter PcaScatter(const Matrix& x, unsupervised::ProjectionModel& model) {
  const std::size_t comps = std::min<std::size_t>({2, x.cols(), x.rows()});
  model = unsupervised::FitPca(x, comps);
  const Matrix projected = unsupervised::Project(model, x);
  Scatter s;
  s.points = Matrix(x.rows(), 2);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < comps; ++c) s.points(r, c) = projected(r, c);
  }
  s.groups.assign(x.rows(), -1);
  s.axis_names = {"PC1", "PC2"};
  return s;
}

ModelEntry TrainOne(const models::ModelSpec& spec, const RunConfig& config, const Matrix& x_train_raw,
                    const Vector& y_train_raw, const PreparedTraining& prepared, const Matrix& x_test,
                    const Vector& y_test, std::size_t num_classes,
                    std::span<const data::FeatureOrigin> origins, const RunOptions& options,
                    visual::RunLog& log) {
  ModelEntry entry;
  entry.spec = spec;
  const auto start = Clock::now();
  try {
    ScopedDeadline deadline(std::chrono::duration<double>(options.model_timeout_seconds));
    const auto& grid = models::Catalog::Default().entry(spec.algorithm).grid;
    if (config.tuning_enabled && GridCandidates(grid).size() > 1) {
      CvOptions cv;
      cv.folds = config.folds;
      cv.seed = config.seed;
      cv.preprocessing = &config.preprocessing;
      cv.origins = origins;
      try {
        entry.tuning = GridSearch(spec, grid, x_train_raw, y_train_raw, num_classes, cv);
        entry.spec = entry.tuning->best;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientRowsForFolds) throw;
        log.Warn(kStageTrain, spec.name() + ": tuning skipped, " + e.what());
      }
    }
    entry.model = models::Fit(entry.spec, prepared.x, prepared.y, num_classes);
    entry.metrics = Evaluate(*entry.model, x_test, y_test);
    entry.loss_trace = LossTrace(*entry.model);
    entry.seconds = SecondsSince(start);
    log.Info(kStageTrain, spec.name() + ": test " + (num_classes ? "accuracy " : "r2 ") +
                              std::to_string(entry.metrics->primary()));
  } catch (const Error& e) {
    entry.seconds = SecondsSince(start);
    entry.status = e.code() == ErrorCode::kTimedOut ? ModelStatus::kTimedOut : ModelStatus::kFailed;
    entry.error = std::string(e.code_name()) + ": " + e.what();
    entry.model.reset();
    log.Warn(kStageTrain, spec.name() + " " + std::string(ModelStatusName(entry.status)) + ": " + e.what());
  } catch (const std::exception& e) {
    entry.seconds = SecondsSince(start);
    entry.status = ModelStatus::kFailed;
    entry.error = std::string("Internal: ") + e.what();
    entry.model.reset();
    log.Warn(kStageTrain, spec.name() + " failed: " + e.what());
  }
  return entry;
}

std::size_t SecondBestClass(const Matrix& proba, std::size_t r) {
  std::vector<std::size_t> order(proba.cols());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return proba(r, a) > proba(r, b); });
  return order.size() > 1 ? order[1] : order[0];
}

void Explain(RunResult& r, const Matrix& x, const Vector& y, const Split& split,
             std::size_t num_classes, visual::RunLog& log) {
  const models::ModelPtr& model = r.final_model;
  const std::size_t p = x.cols();
  const std::uint64_t seed = r.config.seed;
  Explanations& ex = r.explanations;

  const auto shap_rows = Subsample(split.train, kShapBackground, DeriveSeed(seed, 0xB0));
  const Matrix shap_bg = x.select_rows(shap_rows);
  const explain::ShapMode mode =
      p <= explain::kMaxExactShapFeatures ? explain::ShapMode::kExact : explain::ShapMode::kSampled;
  const std::size_t n_shap = std::min(kShapInstances, split.test.size());
  for (std::size_t i = 0; i < n_shap; ++i) {
    CheckDeadline();
    const std::size_t row = split.test[i];
    const Vector inst = RowOf(x, row);
    const std::size_t cls = explain::DefaultExplainedClass(*model, inst);
    ex.shap.push_back({row, cls, explain::Shap(explain::OutputOf(model, cls), inst, shap_bg, mode,
                                               DeriveSeed(seed, 0x5A0 + i))});
  }
  log.Info(kStageExplain, "shap on " + std::to_string(ex.shap.size()) + " instances (" +
                              std::string(explain::ShapModeName(mode)) + ")");

  // Features ranked by mean |shap| over the explained instances.
  Vector importance(p, 0.0);
  for (const auto& item : ex.shap) {
    for (std::size_t j = 0; j < p; ++j) importance[j] += std::abs(item.shap.values[j]);
  }
  std::vector<std::size_t> ranked = AllRows(p);
  std::stable_sort(ranked.begin(), ranked.end(), [&](auto a, auto b) { return importance[a] > importance[b]; });
  ranked.resize(std::min(kPdpFeatures, p));

  if (model->is_classifier()) {
    if (num_classes == 2) {
      ex.pdp_class = 1;
    } else {
      const auto counts = preprocess::ClassCounts(y);
      ex.pdp_class = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
  }
  const Matrix pdp_bg = x.select_rows(Subsample(AllRows(x.rows()), kPdpBackground, DeriveSeed(seed, 0xB1)));
  const auto pdp_fn = explain::OutputOf(model, ex.pdp_class.value_or(0));
  for (std::size_t j : ranked) ex.pdp.push_back(explain::PartialDependence(pdp_fn, pdp_bg, j));
  log.Info(kStageExplain, "pdp on " + std::to_string(ex.pdp.size()) + " features");

  if (!split.test.empty()) {
    const std::size_t row = split.test.front();
    const Vector inst = RowOf(x, row);
    const std::size_t cls = explain::DefaultExplainedClass(*model, inst);
    explain::LimeOptions lo;
    lo.n_samples = std::max<std::size_t>(lo.n_samples, p + 2);
    lo.seed = DeriveSeed(seed, 0x11E);
    ex.lime = LimeItem{row, cls, explain::Lime(explain::OutputOf(model, cls), inst, explain::ColumnStd(x), lo)};
    log.Info(kStageExplain, "lime on row " + std::to_string(row));
  }

  if (!model->is_classifier()) {
    ex.notes.push_back("counterfactual search applies to classifiers only");
    return;
  }
  const Vector predicted = model->predict(x);
  std::vector<std::size_t> order = split.test;
  order.insert(order.end(), split.train.begin(), split.train.end());
  std::optional<std::size_t> wrong;
  for (std::size_t row : order) {
    if (predicted[row] != y[row]) {
      wrong = row;
      break;
    }
  }
  Vector lower(p);
  Vector upper(p);
  for (std::size_t j = 0; j < p; ++j) {
    const Vector col = x.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    lower[j] = *lo;
    upper[j] = *hi;
  }
  CounterfactualItem item;
  std::size_t desired = 0;
  if (wrong) {
    item.row = *wrong;
    desired = static_cast<std::size_t>(y[*wrong]);
  } else {
    item.row = order.front();
    item.misclassified = false;
    Matrix one = x.select_rows(std::vector<std::size_t>{item.row});
    desired = SecondBestClass(model->predict_proba(one), 0);
    ex.notes.push_back("no misclassified row; counterfactual targets the runner-up class of row " +
                       std::to_string(item.row));
  }
  item.counterfactual = explain::FindCounterfactual(explain::ProbaOf(model), RowOf(x, item.row), desired,
                                                    lower, upper);
  log.Info(kStageExplain, "counterfactual on row " + std::to_string(item.row) +
                              (item.counterfactual.found ? " found" : " not found"));
  ex.counterfactual = std::move(item);
}

void RunSupervised(RunResult& r, const data::EncodedData& enc, visual::RunLog& log,
                   const RunOptions& options) {
  const RunConfig& config = r.config;
  const Matrix& x = enc.features.values;
  const Vector& y = enc.labels->encoded();
  const bool classification = config.task == data::Task::kClassification;
  const std::size_t num_classes = classification ? enc.labels->num_classes() : 0;
  const auto& origins = enc.features.origins;

  const Split split = RunStage(kStageSplit, log, [&] {
    SplitSpec spec{config.test_fraction, true, config.seed};
    Split s = TrainTestSplit(x.rows(), classification ? std::span<const double>(y) : std::span<const double>{}, spec);
    for (const auto& w : s.warnings) log.Warn(kStageSplit, w);
    log.Info(kStageSplit, std::to_string(s.train.size()) + " train / " + std::to_string(s.test.size()) + " test rows");
    r.preprocessing.push_back({{"step", "split"},
                               {"train_rows", s.train.size()},
                               {"test_rows", s.test.size()},
                               {"test_fraction", config.test_fraction},
                               {"stratified", classification},
                               {"warnings", s.warnings}});
    return s;
  });

  const Matrix x_train = x.select_rows(split.train);
  const Vector y_train = Pick(y, split.train);
  const Vector y_test = Pick(y, split.test);
  Matrix x_test;
  const PreparedTraining prepared = RunStage(kStagePreprocess, log, [&] {
    PreparedTraining p = PrepareTraining(config.preprocessing, x_train, y_train, origins, config.task, config.seed);
    x_test = p.fitted.Apply(x.select_rows(split.test));
    Json step = ToJson(p.fitted);
    step["step"] = "preprocess";
    step["training_rows_after_oversampling"] = p.x.rows();
    step["fitted_on"] = "training split; refitted inside every cross-validation fold";
    r.preprocessing.push_back(step);
    log.Info(kStagePreprocess, std::string("scaler ") +
                                   (p.fitted.scaler ? std::string(preprocess::ScalerMethodName(p.fitted.scaler->method)) : "none") +
                                   ", sampler " +
                                   (p.fitted.sampler ? std::string(preprocess::SamplerMethodName(p.fitted.sampler->method)) : "none"));
    return p;
  });

  const auto specs = RunStage(kStageGetModels, log, [&] {
    auto s = models::GetModels(config.task, prepared.x.rows(), x.cols(), config.models, config.seed);
    std::string names;
    for (const auto& spec : s) names += (names.empty() ? "" : ", ") + spec.name();
    log.Info(kStageGetModels, std::to_string(s.size()) + " models: " + names);
    return s;
  });

  RunStage(kStageTrain, log, [&] {
    r.models.resize(specs.size());
    const std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    ParallelFor(specs.size(), threads, [&](std::size_t i) {
      r.models[i] = TrainOne(specs[i], config, x_train, y_train, prepared, x_test, y_test, num_classes,
                             origins, options, log);
    });
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.models.size(); ++i) {
      if (r.models[i].status != ModelStatus::kOk) continue;
      if (r.models[i].metrics->primary() > best) {
        best = r.models[i].metrics->primary();
        r.winner = i;
      }
    }
    if (!r.winner) {
      const bool all_timed_out = std::all_of(r.models.begin(), r.models.end(),
                                             [](const auto& m) { return m.status == ModelStatus::kTimedOut; });
      throw Error(all_timed_out ? ErrorCode::kTimedOut : ErrorCode::kInternal, "no model finished training");
    }
    const ModelEntry& w = r.models[*r.winner];
    log.Info(kStageTrain, "winner " + w.spec.name());
    if (classification && num_classes == 2) {
      r.roc = RocCurve(w.model->predict_proba(x_test).column(1), y_test);
    }
  });

  Matrix x_all;
  RunStage(kStageRetrain, log, [&] {
    ScopedDeadline deadline(std::chrono::duration<double>(options.model_timeout_seconds));
    PreparedTraining all = PrepareTraining(config.preprocessing, x, y, origins, config.task, config.seed);
    r.final_model = models::Fit(r.models[*r.winner].spec, all.x, all.y, num_classes);
    x_all = all.fitted.Apply(x);
    r.final_preprocessing = all.fitted;
    r.final_train_metrics = Evaluate(*r.final_model, x_all, y);
    Json step = ToJson(all.fitted);
    step["step"] = "retrain";
    step["training_rows_after_oversampling"] = all.x.rows();
    step["fitted_on"] = "all rows";
    r.preprocessing.push_back(step);
    log.Info(kStageRetrain, r.final_model->spec().name() + " retrained on " + std::to_string(x.rows()) + " rows");
  });

  RunStage(kStageProject, log, [&] {
    unsupervised::ProjectionModel pm;
    Scatter s = PcaScatter(x_all, pm);
    if (classification) {
      for (std::size_t i = 0; i < y.size(); ++i) s.groups[i] = static_cast<int>(y[i]);
    }
    r.projection = std::move(pm);
    r.pca_scatter = std::move(s);
    log.Info(kStageProject, "pca projection of " + std::to_string(x_all.rows()) + " rows");
  });

  RunStage(kStageExplain, log, [&] {
    ScopedDeadline deadline(std::chrono::duration<double>(options.model_timeout_seconds));
    Explain(r, x_all, y, split, num_classes, log);
  });
}

double WithinClusterSse(const Matrix& x, const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  Matrix sums(static_cast<std::size_t>(k), x.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (labels[r] < 0) continue;
    const auto c = static_cast<std::size_t>(labels[r]);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < x.cols(); ++j) sums(c, j) += x(r, j);
  }
  double sse = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (labels[r] < 0) continue;
    const auto c = static_cast<std::size_t>(labels[r]);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(r, j) - sums(c, j) / counts[c];
      sse += d * d;
    }
  }
  return sse;
}

bool Better(const std::optional<double>& a, const std::optional<double>& b) {
  if (!a) return false;
  return !b || *a > *b;
}

ClusterEntry ClusterOne(unsupervised::ClusterAlgorithm algorithm, std::size_t index, const Matrix& x,
                        const RunConfig& config, const RunOptions& options, visual::RunLog& log) {
  using unsupervised::ClusterAlgorithm;
  ClusterEntry entry;
  entry.spec.algorithm = algorithm;
  entry.spec.seed = DeriveSeed(config.seed, index + 1);
  const auto start = Clock::now();
  const std::string name(unsupervised::ClusterAlgorithmName(algorithm));
  try {
    ScopedDeadline deadline(std::chrono::duration<double>(options.model_timeout_seconds));
    if (algorithm == ClusterAlgorithm::kDbscan) {
      entry.spec.min_pts = std::min<std::size_t>(5, x.rows());
      entry.spec.eps = std::max(unsupervised::DbscanEpsHeuristic(x, entry.spec.min_pts), 1e-12);
      entry.result = unsupervised::Cluster(x, entry.spec);
      entry.silhouette = unsupervised::Silhouette(x, entry.result.labels);
    } else if (config.clusters) {
      entry.spec.k = *config.clusters;
      entry.result = unsupervised::Cluster(x, entry.spec);
      entry.silhouette = unsupervised::Silhouette(x, entry.result.labels);
    } else {
      const std::size_t k_max = std::min<std::size_t>(5, x.rows() - 1);
      bool first = true;
      for (std::size_t k = 2; k <= k_max; ++k) {
        unsupervised::ClusterSpec spec = entry.spec;
        spec.k = k;
        auto result = unsupervised::Cluster(x, spec);
        auto score = unsupervised::Silhouette(x, result.labels);
        entry.k_scores.emplace_back(k, score);
        if (first || Better(score, entry.silhouette)) {
          entry.spec = spec;
          entry.result = std::move(result);
          entry.silhouette = score;
          first = false;
        }
      }
      Require(!first, ErrorCode::kTooFewRows, "choosing k needs at least 3 rows");
    }
    entry.inertia = WithinClusterSse(x, entry.result.labels);
    entry.seconds = SecondsSince(start);
    log.Info(kStageCluster, name + ": " + std::to_string(entry.result.n_clusters) + " clusters, silhouette " +
                                (entry.silhouette ? std::to_string(*entry.silhouette) : "undefined"));
  } catch (const Error& e) {
    entry.seconds = SecondsSince(start);
    entry.status = e.code() == ErrorCode::kTimedOut ? ModelStatus::kTimedOut : ModelStatus::kFailed;
    entry.error = std::string(e.code_name()) + ": " + e.what();
    log.Warn(kStageCluster, name + " " + std::string(ModelStatusName(entry.status)) + ": " + e.what());
  }
  return entry;
}

void RunUnsupervised(RunResult& r, const data::EncodedData& enc, visual::RunLog& log,
                     const RunOptions& options) {
  const RunConfig& config = r.config;
  const Matrix& raw = enc.features.values;

  const Matrix x = RunStage(kStagePreprocess, log, [&] {
    PreparedTraining p = PrepareTraining(config.preprocessing, raw, {}, enc.features.origins, config.task, config.seed);
    r.final_preprocessing = p.fitted;
    Json step = ToJson(p.fitted);
    step["step"] = "preprocess";
    step["fitted_on"] = "all rows";
    r.preprocessing.push_back(step);
    log.Info(kStagePreprocess, std::string("scaler ") +
                                   (p.fitted.scaler ? std::string(preprocess::ScalerMethodName(p.fitted.scaler->method)) : "none"));
    return p.x;
  });

  const auto algorithms = RunStage(kStageGetModels, log, [&] {
    std::vector<unsupervised::ClusterAlgorithm> out;
    if (config.models) {
      for (const auto& name : *config.models) {
        auto a = unsupervised::ParseClusterAlgorithm(name);
        Require(a.has_value(), ErrorCode::kUnknownAlgorithmName, "unknown clustering algorithm '" + name + "'");
        out.push_back(*a);
      }
    } else {
      out = {unsupervised::ClusterAlgorithm::kKmeans, unsupervised::ClusterAlgorithm::kDbscan,
             unsupervised::ClusterAlgorithm::kAgglomerative, unsupervised::ClusterAlgorithm::kGmm};
    }
    log.Info(kStageGetModels, std::to_string(out.size()) + " clustering algorithms");
    return out;
  });

  RunStage(kStageProject, log, [&] {
    unsupervised::ProjectionModel pm;
    r.pca_scatter = PcaScatter(x, pm);
    r.projection = std::move(pm);
    log.Info(kStageProject, "pca projection of " + std::to_string(x.rows()) + " rows");
  });

  RunStage(kStageCluster, log, [&] {
    r.clusters.resize(algorithms.size());
    const std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    ParallelFor(algorithms.size(), threads, [&](std::size_t i) {
      r.clusters[i] = ClusterOne(algorithms[i], i, x, config, options, log);
    });
    for (std::size_t i = 0; i < r.clusters.size(); ++i) {
      if (r.clusters[i].status != ModelStatus::kOk) continue;
      if (!r.best_cluster || Better(r.clusters[i].silhouette, r.clusters[*r.best_cluster].silhouette)) {
        r.best_cluster = i;
      }
    }
    Require(r.best_cluster.has_value(), ErrorCode::kInternal, "no clustering algorithm finished");
    Scatter s = *r.pca_scatter;
    s.groups = r.clusters[*r.best_cluster].result.labels;
    r.cluster_scatter = std::move(s);
  });
}

}  // namespace

RunResult RunPipeline(const RunConfig& config, const data::RawTable& table, visual::RunLog& log,
                      const RunOptions& options) {
  RunResult r;
  r.run_id = options.run_id;
  r.config = config;
  r.dataset.source = table.source_path;
  r.dataset.raw_rows = table.num_rows();
  log.Info(kStageSchema, "run started, task " + std::string(data::TaskName(config.task)));
  const bool supervised = config.task != data::Task::kUnsupervised;

  const data::Schema raw_schema = RunStage(kStageSchema, log, [&] {
    data::Schema s = data::InferSchema(table);
    log.Info(kStageSchema, std::to_string(s.columns.size()) + " columns, " + std::to_string(table.num_rows()) + " rows");
    return s;
  });

  data::RawTable clean;
  data::Schema schema;
  RunStage(kStageSanitize, log, [&] {
    std::vector<std::string> used;
    if (config.inputs.empty()) {
      used = table.column_names;
    } else {
      for (const auto& name : config.inputs) {
        if (table.column_index(name)) used.push_back(name);
      }
      if (supervised && config.target && table.column_index(*config.target)) used.push_back(*config.target);
    }
    const data::RawTable selected = data::SelectColumns(table, used);
    clean = data::Sanitize(selected, data::InferSchema(selected));
    schema = data::InferSchema(clean);
    r.dataset.rows = clean.num_rows();
    r.dataset.schema = schema;
    r.preprocessing.push_back({{"step", "sanitize"},
                               {"rows_in", table.num_rows()},
                               {"rows_out", clean.num_rows()},
                               {"columns", used}});
    log.Info(kStageSanitize, "dropped " + std::to_string(table.num_rows() - clean.num_rows()) +
                                 " rows with missing values");
  });
  (void)raw_schema;

  const data::EncodedData enc = RunStage(kStageEncode, log, [&] {
    data::EncodedData e = data::Encode(clean, schema, supervised ? config.target : std::nullopt, config.task,
                                       config.inputs);
    Require(e.features.num_features() > 0, ErrorCode::kEmptyMatrix, "no input features");
    if (config.task == data::Task::kClassification) {
      Require(e.labels->num_classes() >= 2, ErrorCode::kSingleClass, "target has a single class");
    }
    SummarizeDataset(r, e);
    r.preprocessing.push_back({{"step", "encode"},
                               {"features", e.features.feature_names},
                               {"rows", e.features.values.rows()}});
    log.Info(kStageEncode, std::to_string(e.features.num_features()) + " encoded features");
    return e;
  });

  if (supervised) {
    RunSupervised(r, enc, log, options);
  } else {
    RunUnsupervised(r, enc, log, options);
  }
  log.Info(kStageExplain, "run finished");
  return r;
}

}  // namespace tabml::pipeline
