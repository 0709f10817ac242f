// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <numeric>
#include <atomic>
#include <array>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/data/table.hpp"
#include "tabml/explain/shap.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/models/linear.hpp"
#include "tabml/models/tree.hpp"
#include "tabml/neural/mlp.hpp"
#include "tabml/pipeline/metrics.hpp"
#include "tabml/pipeline/run.hpp"
#include "tabml/pipeline/split.hpp"
#include "tabml/preprocess/sampler.hpp"
#include "tabml/preprocess/scaler.hpp"
#include "tabml/service/job_store.hpp"
#include "tabml/service/service.hpp"
#include "tabml/stats/correlation.hpp"
#include "tabml/unsupervised/cluster.hpp"
#include "tabml/unsupervised/eigen.hpp"
#include "tabml/unsupervised/projection.hpp"
#include "tabml/visual/report.hpp"

namespace fs = std::filesystem;
using namespace tabml;

namespace {

// Collects the first few problems of a check.
class Check {
 public:
  void Expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  void Note(const std::string& info) { info_ = info; }
  bool ok() const { return failures_ == 0; }
  std::string Summary() const {
    std::string s = info_;
    if (failures_) {
      s += (s.empty() ? "" : "; ") + std::to_string(failures_) + " problem(s)";
      for (const auto& n : notes_) s += "; " + n;
    }
    return s;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_;
  std::string info_;
};

std::string Num(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

Matrix Column(std::initializer_list<double> v) {
  Matrix m(v.size(), 1);
  std::size_t r = 0;
  for (double x : v) m(r++, 0) = x;
  return m;
}

Matrix RandomMatrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

std::pair<Matrix, Vector> Blobs(const std::vector<Vector>& centers, std::size_t per_class, double spread, Rng& rng) {
  Matrix x(centers.size() * per_class, centers[0].size());
  Vector y(x.rows());
  std::size_t r = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i, ++r) {
      for (std::size_t j = 0; j < x.cols(); ++j) x(r, j) = centers[c][j] + spread * rng.normal();
      y[r] = static_cast<double>(c);
    }
  }
  return {x, y};
}

// ---------------------------------------------------------------- scalers

void ScalerOracles(Check& c) {
  using preprocess::ScalerMethod;
  auto near = [&](double got, double want, const std::string& what) {
    c.Expect(std::abs(got - want) <= 1e-9, what + ": got " + std::to_string(got) + " want " + std::to_string(want));
  };
  {
    const Matrix x = Column({1, 2, 3});
    const auto p = preprocess::FitScaler(x, ScalerMethod::kStandard);
    near(p.features[0].mean, 2.0, "standard mean");
    near(p.features[0].std, std::sqrt(2.0 / 3.0), "standard population std");
    const Matrix t = preprocess::Transform(x, p);
    const double z = 1.0 / std::sqrt(2.0 / 3.0);
    near(t(0, 0), -z, "standard t[0]");
    near(t(1, 0), 0.0, "standard t[1]");
    near(t(2, 0), z, "standard t[2]");
  }
  {
    const Matrix x = Column({1, 2, 3, 4, 5});
    const auto p = preprocess::FitScaler(x, ScalerMethod::kRobust);
    near(p.features[0].median, 3.0, "robust median");
    near(p.features[0].iqr, 2.0, "robust IQR");
    const Matrix t = preprocess::Transform(x, p);
    for (std::size_t i = 0; i < 5; ++i) near(t(i, 0), (static_cast<double>(i) + 1.0 - 3.0) / 2.0, "robust t");
  }
  {
    Matrix x(2, 2);
    x(0, 0) = 3;
    x(0, 1) = 4;  // second row stays zero
    const Matrix t = preprocess::Transform(x, preprocess::FitScaler(x, ScalerMethod::kUnitNorm));
    near(t(0, 0), 0.6, "unit_norm x");
    near(t(0, 1), 0.8, "unit_norm y");
    near(t(1, 0), 0.0, "unit_norm zero row");
  }
  {
    const Matrix x = Column({10, 20, 30, 40});
    const Matrix t = preprocess::Transform(x, preprocess::FitScaler(x, ScalerMethod::kQuantile));
    for (std::size_t i = 0; i < 4; ++i) near(t(i, 0), static_cast<double>(i) / 3.0, "quantile t");
  }
  {
    const Matrix x = Column({5, 5, 5});
    const auto p = preprocess::FitScaler(x, ScalerMethod::kStandard);
    c.Expect(p.features[0].identity, "constant column not flagged");
  }
  for (double v : {-7.5, -1.0, -1e-3, 0.0, 1e-3, 0.5, 2.0, 123.0}) {
    near(preprocess::YeoJohnson(v, 1.0), v, "yeo-johnson lambda=1 at " + std::to_string(v));
  }
}

// ---------------------------------------------------------------- smote

// Smallest distance from s to a segment between two rows of `pool`.
double SegmentResidual(std::span<const double> s, const std::vector<Vector>& pool) {
  double best = INFINITY;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i; j < pool.size(); ++j) {
      const auto& a = pool[i];
      const auto& b = pool[j];
      double dd = 0.0, dp = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        dd += (b[k] - a[k]) * (b[k] - a[k]);
        dp += (s[k] - a[k]) * (b[k] - a[k]);
      }
      const double u = dd > 0.0 ? std::clamp(dp / dd, 0.0, 1.0) : 0.0;
      double r2 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double e = s[k] - (a[k] + u * (b[k] - a[k]));
        r2 += e * e;
      }
      best = std::min(best, std::sqrt(r2));
    }
  }
  return best;
}

void Smote(Check& c) {
  std::mt19937_64 gen(2024);
  std::size_t synthetic = 0;
  double worst = 0.0;
  for (int d = 0; d < 20; ++d) {
    Rng rng(1000 + d);
    const std::size_t classes = 2 + gen() % 3;
    const std::size_t p = 2 + gen() % 4;
    std::vector<std::size_t> counts(classes);
    for (auto& n : counts) n = 3 + gen() % 30;
    counts[gen() % classes] = 40;
    std::size_t n_rows = 0;
    for (auto n : counts) n_rows += n;
    Matrix x = RandomMatrix(n_rows, p, rng);
    Vector y;
    for (std::size_t k = 0; k < classes; ++k) y.insert(y.end(), counts[k], static_cast<double>(k));
    preprocess::SamplerSpec spec;
    spec.method = preprocess::SamplerMethod::kSmote;
    spec.k_neighbors = 2;
    spec.seed = static_cast<std::uint64_t>(d);
    const auto out = preprocess::Oversample(x, y, spec);
    const auto after = preprocess::ClassCounts(out.y);
    c.Expect(std::all_of(after.begin(), after.end(), [&](std::size_t n) { return n == 40; }),
             "dataset " + std::to_string(d) + ": unequal class counts");
    std::vector<std::vector<Vector>> pools(classes);
    for (std::size_t r = 0; r < n_rows; ++r) {
      auto row = x.row(r);
      pools[static_cast<std::size_t>(y[r])].emplace_back(row.begin(), row.end());
    }
    for (std::size_t r = out.original_rows; r < out.x.rows(); ++r) {
      const double res = SegmentResidual(out.x.row(r), pools[static_cast<std::size_t>(out.y[r])]);
      worst = std::max(worst, res);
      ++synthetic;
    }
  }
  c.Expect(worst < 1e-9, "synthetic point off every minority segment, residual " + Num(worst));
  c.Note(std::to_string(synthetic) + " synthetic points, max residual " + Num(worst));
}

// ---------------------------------------------------------------- correlation

double KendallOracle(const Vector& x, const Vector& y) {
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  return (concordant - discordant) / std::sqrt((concordant + discordant + tie_x) * (concordant + discordant + tie_y));
}

void Correlation(Check& c) {
  std::mt19937_64 gen(77);
  int compared = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + gen() % 49;
    const int levels = 2 + static_cast<int>(gen() % 12);  // coarse values force ties
    Vector x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(gen() % levels);
      y[i] = static_cast<double>(gen() % levels);
    }
    const double want = KendallOracle(x, y);
    if (!std::isfinite(want)) continue;  // a constant side
    ++compared;
    const double got = stats::KendallTauB(x, y);
    c.Expect(got == want, "tau-b mismatch n=" + std::to_string(n) + ": " + std::to_string(got) + " vs " +
                              std::to_string(want));
  }
  Rng rng(5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vector x(30), y(30), cubed(30);
    for (std::size_t i = 0; i < 30; ++i) {
      x[i] = rng.normal();
      y[i] = x[i] + rng.normal();
      cubed[i] = x[i] * x[i] * x[i];
    }
    worst = std::max(worst, std::abs(stats::Spearman(x, y) - stats::Spearman(cubed, y)));
  }
  c.Expect(worst <= 1e-12, "spearman changed under x^3 by " + Num(worst));
  c.Note(std::to_string(compared) + " tau-b vectors exact; spearman max drift " + Num(worst));
}

// ---------------------------------------------------------------- supervised

void Supervised(Check& c) {
  Rng rng(31);
  auto [x, y] = Blobs({{0.0, 0.0}, {4.0, 0.0}, {2.0, 3.5}}, 100, 0.8, rng);
  pipeline::SplitSpec split_spec;
  split_spec.seed = 1;
  const auto split = pipeline::TrainTestSplit(x.rows(), y, split_spec);
  const Matrix x_train = x.select_rows(split.train);
  const Matrix x_test = x.select_rows(split.test);
  Vector y_train, y_test;
  for (auto r : split.train) y_train.push_back(y[r]);
  for (auto r : split.test) y_test.push_back(y[r]);
  std::string accs;
  for (const auto& spec : models::GetModels(models::Task::kClassification, x_train.rows(), 2, std::nullopt, 9)) {
    const auto model = models::Fit(spec, x_train, y_train, 3);
    const Vector pred = model->predict(x_test);
    double hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == y_test[i];
    const double acc = hits / static_cast<double>(pred.size());
    c.Expect(acc >= 0.90, spec.name() + " accuracy " + Num(acc));
    accs += (accs.empty() ? "" : " ") + spec.name() + "=" + Num(acc);
  }

  Rng lr(8);
  const Matrix xl = RandomMatrix(80, 4, lr);
  const Vector w = {1.5, -2.0, 0.25, 3.0};
  const double b = -0.7;
  Vector yl(80);
  for (std::size_t r = 0; r < 80; ++r) yl[r] = b + Dot(xl.row(r), w);
  const auto model = models::Fit(models::Catalog::Default().DefaultSpec(models::Algorithm::kLinearRegression,
                                                                         models::Task::kRegression, 80, 4, 0),
                                 xl, yl);
  Matrix probe(5, 4);
  for (std::size_t j = 0; j < 4; ++j) probe(j + 1, j) = 1.0;
  const Vector out = model->predict(probe);
  double worst = std::abs(out[0] - b);
  for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(out[j + 1] - out[0] - w[j]));
  c.Expect(worst <= 1e-6, "planted coefficients off by " + Num(worst));
  c.Note(accs + "; linear max coef error " + Num(worst));
}

// ---------------------------------------------------------------- gradients

double RelativeError(const Vector& a, const Vector& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    scale += a[i] * a[i] + b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

template <typename F>
Vector CentralDifference(F&& f, Vector params, double h = 1e-6) {
  Vector g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f(params);
    params[i] = keep - h;
    const double down = f(params);
    params[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

void Gradients(Check& c) {
  double worst_lr = 0.0, worst_mlp = 0.0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(400 + t);
    const std::size_t n = 5 + t, p = 2 + t % 3;
    const Matrix x = RandomMatrix(n, p, rng);
    Vector labels(n);
    for (auto& v : labels) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const models::BinaryLogisticObjective obj(x, labels, 0.1 * t);
    Vector params(p + 1);
    for (auto& v : params) v = rng.normal();
    const double e = RelativeError(obj.Gradient(params), CentralDifference([&](const Vector& q) { return obj.Value(q); }, params));
    worst_lr = std::max(worst_lr, e);
    c.Expect(e < 1e-4, "logistic instance " + std::to_string(t) + " rel error " + Num(e));

    const bool classification = t % 2 == 0;
    const std::size_t outputs = classification ? 3 : 1;
    const auto shape = neural::MakeShape(p, 1 + t % 2, 4, outputs, classification);
    Vector w = neural::XavierInit(shape, rng);
    for (auto& v : w) v += 0.05 * rng.normal();  // nonzero biases
    Vector y(n);
    for (auto& v : y) v = classification ? static_cast<double>(rng.index(3)) : rng.normal();
    Vector analytic;
    neural::Loss(shape, w, x, y, &analytic);
    const double em = RelativeError(
        analytic, CentralDifference([&](const Vector& q) { return neural::Loss(shape, q, x, y); }, w));
    worst_mlp = std::max(worst_mlp, em);
    c.Expect(em < 1e-4, "mlp instance " + std::to_string(t) + " rel error " + Num(em));
  }
  c.Note("max relative error logistic " + Num(worst_lr) + ", mlp " + Num(worst_mlp));
}

// ---------------------------------------------------------------- monotone training

void Monotone(Check& c) {
  double worst_rise = 0.0, worst_drop = 0.0;
  for (int d = 0; d < 10; ++d) {
    Rng rng(600 + d);
    const Matrix x = RandomMatrix(120, 3, rng);
    Vector y(120);
    const bool classification = d % 2 == 1;
    for (std::size_t r = 0; r < 120; ++r) {
      const double s = x(r, 0) * x(r, 1) + std::sin(2 * x(r, 2)) + 0.3 * rng.normal();
      y[r] = classification ? (s > 0.3 ? 2.0 : s > -0.3 ? 1.0 : 0.0) : s;
    }
    const auto task = classification ? models::Task::kClassification : models::Task::kRegression;
    auto spec = models::Catalog::Default().DefaultSpec(models::Algorithm::kGradientBoosting, task, 120, 3, d);
    spec.params["n_stages"] = 100;
    const auto model = models::Fit(spec, x, y, classification ? 3 : 0);
    const Vector& trace = models::BoostingLossTrace(*model);
    c.Expect(trace.size() >= 100, "boosting trace has " + std::to_string(trace.size()) + " entries");
    for (std::size_t i = 1; i < trace.size(); ++i) {
      worst_rise = std::max(worst_rise, trace[i] - trace[i - 1]);
      c.Expect(trace[i] <= trace[i - 1], "boosting loss rose at stage " + std::to_string(i) + " on dataset " +
                                             std::to_string(d) + " by " + Num(trace[i] - trace[i - 1]));
    }

    unsupervised::ClusterSpec gmm;
    gmm.algorithm = unsupervised::ClusterAlgorithm::kGmm;
    gmm.k = 2 + d % 3;
    gmm.seed = d;
    auto [bx, by] = Blobs({{0, 0, 0}, {3, 1, 0}, {0, 3, 2}, {2, 2, 4}}, 40, 1.0, rng);
    const auto res = unsupervised::Cluster(bx, gmm);
    const Vector& ll = res.log_likelihood_trace;
    c.Expect(ll.size() >= 2, "gmm trace too short");
    for (std::size_t i = 1; i < ll.size(); ++i) {
      worst_drop = std::max(worst_drop, ll[i - 1] - ll[i]);
      c.Expect(ll[i] >= ll[i - 1] - 1e-8, "gmm log-likelihood fell at iteration " + std::to_string(i) + " by " +
                                              Num(ll[i - 1] - ll[i]));
    }
  }
  c.Note("max boosting rise " + Num(worst_rise) + ", max gmm drop " + Num(worst_drop));
}

// ---------------------------------------------------------------- pca

// Roots of the characteristic polynomial of a symmetric 3x3 matrix,
// trigonometric form, descending.
std::array<double, 3> CharacteristicRoots(const Matrix& a) {
  const double tr = a(0, 0) + a(1, 1) + a(2, 2);
  const double c2 = a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2) - a(0, 1) * a(1, 0) -
                    a(0, 2) * a(2, 0) - a(1, 2) * a(2, 1);
  const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                     a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                     a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  // lambda^3 - tr lambda^2 + c2 lambda - det = 0, shifted by tr/3.
  const double m = tr / 3.0;
  const double p = (tr * tr - 3.0 * c2) / 9.0;
  const double q = (2.0 * tr * tr * tr - 9.0 * tr * c2 + 27.0 * det) / 54.0;
  const double sp = std::sqrt(std::max(p, 0.0));
  const double arg = sp > 0 ? std::clamp(q / (sp * sp * sp), -1.0, 1.0) : 0.0;
  const double phi = std::acos(arg) / 3.0;
  std::array<double, 3> r = {m + 2 * sp * std::cos(phi), m + 2 * sp * std::cos(phi + 2 * std::numbers::pi / 3),
                             m + 2 * sp * std::cos(phi - 2 * std::numbers::pi / 3)};
  std::sort(r.begin(), r.end(), std::greater<>());
  return r;
}

void Pca(Check& c) {
  Rng rng(91);
  double worst_val = 0.0, worst_vec = 0.0;
  for (int t = 0; t < 100; ++t) {
    Matrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i; j < 3; ++j) a(i, j) = a(j, i) = rng.uniform(-5.0, 5.0);
    }
    const auto eig = unsupervised::JacobiEigen(a);
    const auto roots = CharacteristicRoots(a);
    for (std::size_t k = 0; k < 3; ++k) {
      worst_val = std::max(worst_val, std::abs(eig.values[k] - roots[k]));
      double res = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        double av = 0.0;
        for (std::size_t j = 0; j < 3; ++j) av += a(i, j) * eig.vectors(j, k);
        res = std::max(res, std::abs(av - eig.values[k] * eig.vectors(i, k)));
      }
      worst_vec = std::max(worst_vec, res);
    }
  }
  c.Expect(worst_val <= 1e-8, "eigenvalue error " + Num(worst_val));
  c.Expect(worst_vec <= 1e-8, "eigenpair residual " + Num(worst_vec));

  double worst_proj = 0.0;
  for (int t = 0; t < 5; ++t) {
    Matrix x = RandomMatrix(30, 4, rng);
    for (std::size_t r = 0; r < 30; ++r) x(r, 1) += 2.0 * x(r, 0);  // distinct spectrum
    const Matrix pca = unsupervised::Project(unsupervised::FitPca(x, 2), x);
    const Matrix kpca = unsupervised::Project(unsupervised::FitKernelPca(x, 2, unsupervised::Kernel::kLinear), x);
    for (std::size_t k = 0; k < 2; ++k) {
      double same = 0.0, flipped = 0.0;
      for (std::size_t r = 0; r < 30; ++r) {
        same = std::max(same, std::abs(pca(r, k) - kpca(r, k)));
        flipped = std::max(flipped, std::abs(pca(r, k) + kpca(r, k)));
      }
      worst_proj = std::max(worst_proj, std::min(same, flipped));
    }
  }
  c.Expect(worst_proj <= 1e-6, "linear kernel pca differs from pca by " + Num(worst_proj));
  c.Note("eigenvalue error " + Num(worst_val) + ", residual " + Num(worst_vec) + ", kpca diff " + Num(worst_proj));
}

// ---------------------------------------------------------------- shap

// Shapley values by averaging marginal contributions over every permutation.
Vector PermutationShapley(const explain::ModelFunction& f, std::span<const double> instance, const Matrix& background) {
  const std::size_t p = instance.size();
  auto worth = [&](const std::vector<bool>& present) {
    Matrix m = background;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t j = 0; j < p; ++j) {
        if (present[j]) m(r, j) = instance[j];
      }
    }
    const Vector out = f(m);
    double s = 0.0;
    for (double v : out) s += v;
    return s / static_cast<double>(out.size());
  };
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  Vector phi(p, 0.0);
  double count = 0.0;
  do {
    std::vector<bool> present(p, false);
    double prev = worth(present);
    for (std::size_t j : order) {
      present[j] = true;
      const double now = worth(present);
      phi[j] += now - prev;
      prev = now;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= count;
  return phi;
}

void ShapExactness(Check& c) {
  Rng rng(13);
  double worst_brute = 0.0, worst_linear = 0.0, worst_eff = 0.0;
  auto efficiency = [&](const explain::ShapValues& s) {
    double sum = s.baseline;
    for (double v : s.values) sum += v;
    const double e = std::abs(sum - s.output);
    worst_eff = std::max(worst_eff, e);
    c.Expect(e <= 1e-6, "efficiency gap " + Num(e));
  };
  for (std::size_t p = 1; p <= 5; ++p) {
    const Vector a = [&] {
      Vector v(p);
      for (auto& x : v) x = rng.normal();
      return v;
    }();
    explain::ModelFunction f = [a](const Matrix& m) {
      Vector out(m.rows());
      for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0, prod = 1.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
          s += a[j] * m(r, j);
          prod *= std::tanh(m(r, j));
        }
        out[r] = s + prod + std::max(m(r, 0), 0.0) * m(r, m.cols() - 1);
      }
      return out;
    };
    const Matrix background = RandomMatrix(7, p, rng);
    for (int inst = 0; inst < 3; ++inst) {
      Vector x(p);
      for (auto& v : x) v = rng.normal();
      const auto s = explain::Shap(f, x, background, explain::ShapMode::kExact);
      const Vector oracle = PermutationShapley(f, x, background);
      for (std::size_t j = 0; j < p; ++j) worst_brute = std::max(worst_brute, std::abs(s.values[j] - oracle[j]));
      efficiency(s);
    }
  }
  c.Expect(worst_brute <= 1e-9, "exact shap vs enumeration " + Num(worst_brute));

  const Matrix xl = RandomMatrix(60, 4, rng);
  const Vector w = {2.0, -1.0, 0.5, 0.0};
  Vector yl(60);
  for (std::size_t r = 0; r < 60; ++r) yl[r] = 1.0 + Dot(xl.row(r), w);
  const auto model = models::Fit(
      models::Catalog::Default().DefaultSpec(models::Algorithm::kLinearRegression, models::Task::kRegression, 60, 4, 0),
      xl, yl);
  const Matrix background = xl.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Vector mean = ColumnMeans(background);
  for (auto mode : {explain::ShapMode::kExact, explain::ShapMode::kSampled}) {
    for (std::size_t r = 20; r < 25; ++r) {
      const auto s = explain::Shap(explain::OutputOf(model), xl.row(r), background, mode, r);
      for (std::size_t j = 0; j < 4; ++j) {
        worst_linear = std::max(worst_linear, std::abs(s.values[j] - w[j] * (xl(r, j) - mean[j])));
      }
      efficiency(s);
    }
  }
  c.Expect(worst_linear <= 1e-6, "linear closed form off by " + Num(worst_linear));
  c.Note("enumeration " + Num(worst_brute) + ", linear " + Num(worst_linear) + ", efficiency " + Num(worst_eff));
}

// ---------------------------------------------------------------- auc

void Auc(Check& c) {
  std::mt19937_64 gen(3);
  int compared = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + gen() % 40;
    Vector scores(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(gen() % 10) / 10.0;  // plenty of ties
      labels[i] = static_cast<double>(gen() % 2);
    }
    labels[0] = 0.0;
    labels[1] = 1.0;
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[i] != 1.0 || labels[j] != 0.0) continue;
        pairs += 1.0;
        wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
      }
    }
    const auto auc = pipeline::RankAuc(scores, labels);
    ++compared;
    c.Expect(auc.has_value() && *auc == wins / pairs,
             "vector " + std::to_string(t) + ": " + (auc ? std::to_string(*auc) : "none") + " vs " +
                 std::to_string(wins / pairs));
  }
  c.Note(std::to_string(compared) + " vectors compared exactly");
}

// ---------------------------------------------------------------- end to end

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void EndToEnd(Check& c) {
  const fs::path root = fs::temp_directory_path() / "tabml_acceptance_e2e";
  fs::remove_all(root);
  const auto config = pipeline::RunConfigFromJson(
      {{"task", "classification"}, {"dataset_id", "demo"}, {"target", "outcome"}, {"split", {{"seed", 42}}}});
  std::vector<visual::ReportFiles> files;
  nlohmann::json doc;
  for (int run = 0; run < 2; ++run) {
    const data::RawTable table = data::ReadTable(TABML_DATA_DIR "/demo.csv");
    visual::RunLog log("acceptance");
    pipeline::RunOptions options;
    options.run_id = "acceptance";
    const auto result = pipeline::RunPipeline(config, table, log, options);
    const auto report = visual::RenderReport(result);
    files.push_back(visual::WriteReport(report, result, root / std::to_string(run)));
    doc = report.document;
  }
  c.Expect(Slurp(files[0].report) == Slurp(files[1].report), "report.json differs between runs");
  c.Expect(files[0].plots.size() == files[1].plots.size() && !files[0].plots.empty(), "plot sets differ");
  for (std::size_t i = 0; i < std::min(files[0].plots.size(), files[1].plots.size()); ++i) {
    c.Expect(Slurp(files[0].plots[i]) == Slurp(files[1].plots[i]), files[0].plots[i].filename().string() + " differs");
  }
  std::set<std::string> names;
  for (const auto& m : doc["models"]) {
    if (m["status"] == "ok") names.insert(m["name"].get<std::string>());
  }
  for (auto a : models::DefaultAlgorithms(models::Task::kClassification)) {
    c.Expect(names.count(std::string(models::AlgorithmName(a))) == 1, "missing model " + std::string(models::AlgorithmName(a)));
  }
  c.Expect(doc["winner"].is_object(), "no winner");
  std::set<std::string> methods;
  for (const auto& e : doc["explanations"]) methods.insert(e["method"].get<std::string>());
  c.Expect(methods == std::set<std::string>{"pdp", "shap", "lime", "counterfactual"}, "explanation methods incomplete");
  c.Expect(visual::ValidateReport(doc).empty(), "report fails validation");
  c.Note(std::to_string(names.size()) + " models, winner " + doc["winner"].value("name", std::string("none")) + ", " +
         std::to_string(files[0].plots.size()) + " plots identical");
  fs::remove_all(root);
}

// ---------------------------------------------------------------- service

void ServiceStateMachine(Check& c) {
  using service::JobState;
  const fs::path root = fs::temp_directory_path() / "tabml_acceptance_service";
  fs::remove_all(root);
  constexpr JobState kStates[] = {JobState::kQueued, JobState::kRunning, JobState::kSucceeded, JobState::kFailed,
                                  JobState::kTimedOut};
  {
    service::JobStore store(root / "fuzz.jsonl");
    std::vector<std::string> ids;
    for (int i = 0; i < 25; ++i) ids.push_back(store.Create("ds", nlohmann::json::object()).job_id);
    std::atomic<int> illegal_accepted{0}, wrong_error{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        std::mt19937_64 gen(900 + t);
        for (int op = 0; op < 250; ++op) {
          const auto& id = ids[gen() % ids.size()];
          if (gen() % 10 == 0) {
            store.ClaimNotification(id);
            continue;
          }
          const JobState to = kStates[gen() % 5];
          try {
            const auto before = store.Get(id)->state;
            const auto after = store.Transition(id, to, service::JobError{"s", "c", "m"}, "/r");
            // another thread may have moved it in between; the journal replay below is the real judge
            if (service::IsTerminal(before) && after.state != before) ++illegal_accepted;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kIllegalTransition) ++wrong_error;
          }
        }
      });
    }
    for (auto& th : threads) th.join();
    c.Expect(illegal_accepted == 0, "terminal state left");
    c.Expect(wrong_error == 0, "unexpected error code");
    std::map<std::string, JobState> last;
    std::ifstream in(root / "fuzz.jsonl");
    std::string line;
    std::size_t events = 0;
    while (std::getline(in, line)) {
      const auto entry = nlohmann::json::parse(line);
      const auto job = service::JobFromJson(entry["job"]);
      const std::string event = entry["event"];
      ++events;
      if (event == "created") {
        c.Expect(job.state == JobState::kQueued, "created non-queued");
      } else if (event == "notified") {
        c.Expect(service::IsTerminal(last[job.job_id]) && job.state == last[job.job_id], "notified while active");
      } else {
        c.Expect(service::IsLegalTransition(last[job.job_id], job.state),
                 "journal " + std::string(service::JobStateName(last[job.job_id])) + " -> " +
                     std::string(service::JobStateName(job.state)));
      }
      last[job.job_id] = job.state;
    }
    c.Note(std::to_string(events) + " journal events legal");
  }

  service::ServiceOptions options;
  options.data_root = root / "svc";
  options.demo_dataset = TABML_DATA_DIR "/demo.csv";
  std::string id;
  {
    service::JobService crashed(options);
    const auto sub = crashed.Submit({{"task", "classification"}, {"dataset_id", "demo"}, {"target", "outcome"}});
    c.Expect(sub.job.has_value(), "submission rejected");
    if (!sub.job) return;
    id = sub.job->job_id;
    crashed.jobs().Transition(id, JobState::kRunning);
  }
  std::string first;
  {
    service::JobService restarted(options);
    restarted.Start();
    const auto job = restarted.WaitForTerminal(id, std::chrono::seconds(240));
    c.Expect(job && job->state == JobState::kSucceeded && job->attempts == 2, "interrupted job did not rerun");
    first = Slurp(restarted.JobDir(id) / "report.json");
    restarted.Stop();
  }
  // Interrupt the finished job's twin once more: replay its journal up to running and rerun.
  {
    std::ifstream in(options.data_root / "jobs.jsonl");
    std::vector<std::string> keep;
    std::string line;
    while (std::getline(in, line)) {
      keep.push_back(line);
      const auto entry = nlohmann::json::parse(line);
      if (entry["job"]["job_id"] == id && entry["event"] == "running" && entry["job"]["attempts"] == 2) break;
    }
    std::ofstream out(options.data_root / "jobs.jsonl", std::ios::trunc);
    for (const auto& l : keep) out << l << '\n';
  }
  service::JobService again(options);
  again.Start();
  const auto job = again.WaitForTerminal(id, std::chrono::seconds(240));
  c.Expect(job && job->state == JobState::kSucceeded && job->attempts == 3, "second rerun failed");
  c.Expect(!first.empty() && Slurp(again.JobDir(id) / "report.json") == first, "rerun report bytes differ");
  again.Stop();
  fs::remove_all(root);
}

struct Criterion {
  std::string name;
  double limit_seconds;  // 0: no runtime bound
  std::function<void(Check&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"scaler-oracles", 1.0, ScalerOracles},
      {"smote-balance-and-convexity", 5.0, Smote},
      {"correlation-oracles", 0.0, Correlation},
      {"supervised-suite", 60.0, Supervised},
      {"gradient-checks", 0.0, Gradients},
      {"boosting-em-monotonicity", 0.0, Monotone},
      {"pca-oracle", 0.0, Pca},
      {"shap-exactness", 0.0, ShapExactness},
      {"auc-oracle", 0.0, Auc},
      {"end-to-end-reproducibility", 300.0, EndToEnd},
      {"service-state-machine", 0.0, ServiceStateMachine},
  };
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.limit_seconds > 0) {
      check.Expect(secs < criterion.limit_seconds, "runtime " + Num(secs) + " s over " + Num(criterion.limit_seconds) + " s");
    }
    failed += !check.ok();
    std::cout << (check.ok() ? "PASS " : "FAIL ") << criterion.name << " (" << Num(secs) << " s) " << check.Summary()
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
