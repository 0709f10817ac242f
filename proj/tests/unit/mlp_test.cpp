#include "tabml/neural/mlp.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "tabml/core/error.hpp"
#include "tabml/models/catalog.hpp"
#include "test_util.hpp"

namespace tabml::neural {
namespace {

using models::Algorithm;
using models::Catalog;
using models::Task;

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(500 + trial);
    const bool classification = trial % 2 == 0;
    const std::size_t inputs = 1 + rng.index(3);
    const std::size_t classes = classification ? 2 + rng.index(2) : 1;
    MlpShape shape = MakeShape(inputs, 1 + trial % 3, 3 + rng.index(3), classes, classification);
    Matrix x = testing::RandomMatrix(5, inputs, 900 + trial);
    Vector y(5);
    for (double& v : y) v = classification ? static_cast<double>(rng.index(classes)) : rng.normal();
    Vector params = XavierInit(shape, rng);
    for (double& p : params) p += 0.1 * rng.normal();  // non-zero biases
    Vector grad;
    Loss(shape, params, x, y, &grad);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double h = 1e-6;
      Vector plus = params, minus = params;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (Loss(shape, plus, x, y) - Loss(shape, minus, x, y)) / (2 * h);
      if (std::abs(fd) < 1e-9 && std::abs(grad[i]) < 1e-9) continue;
      EXPECT_LT(RelativeError(fd, grad[i]), 1e-4) << "trial " << trial << " param " << i;
    }
  }
}

TEST(Mlp, NoHiddenLayerIsMultinomialLogistic) {
  Rng rng(3);
  MlpShape shape = MakeShape(3, 0, 0, 4, true);
  ASSERT_EQ(shape.num_params(), 4u * 4u);
  Vector params(shape.num_params());
  for (double& p : params) p = rng.normal();
  Matrix x = testing::RandomMatrix(7, 3, 4);
  Vector y = {0, 1, 2, 3, 0, 2, 1};
  // Softmax regression: W (4x3), b (4) laid out W then b.
  double expected = 0.0;
  for (std::size_t r = 0; r < 7; ++r) {
    Vector z(4);
    for (std::size_t k = 0; k < 4; ++k) {
      z[k] = params[12 + k];
      for (std::size_t j = 0; j < 3; ++j) z[k] += params[k * 3 + j] * x(r, j);
    }
    double total = 0.0;
    for (double v : z) total += std::exp(v);
    expected += -std::log(std::exp(z[static_cast<std::size_t>(y[r])]) / total);
  }
  EXPECT_NEAR(Loss(shape, params, x, y), expected / 7.0, 1e-12);
}

TEST(Mlp, TrainingReducesLossOnBlobs) {
  auto [x, y] = testing::Blobs({{-2, -2}, {2, 2}, {-2, 2}}, 30, 0.6, 31);
  models::ModelSpec spec =
      Catalog::Default().DefaultSpec(Algorithm::kMlp, Task::kClassification, 90, 2, 11);
  models::ModelPtr m = models::Fit(spec, x, y);
  const Vector& trace = MlpLossTrace(*m);
  ASSERT_EQ(trace.size(), 200u);
  EXPECT_LE(trace.back(), trace.front());
  EXPECT_GE(testing::Accuracy(m->predict(x), y), 0.95);
}

TEST(Mlp, RegressionFitsSmoothFunction) {
  Matrix x = testing::RandomMatrix(120, 2, 41);
  Vector y(120);
  for (std::size_t r = 0; r < 120; ++r) y[r] = 50.0 + 10.0 * x(r, 0) - 5.0 * x(r, 1);
  models::ModelSpec spec =
      Catalog::Default().DefaultSpec(Algorithm::kMlp, Task::kRegression, 120, 2, 11);
  models::ModelPtr m = models::Fit(spec, x, y);
  Vector pred = m->predict(x);
  double sse = 0.0, sst = 0.0;
  for (std::size_t r = 0; r < 120; ++r) {
    sse += (pred[r] - y[r]) * (pred[r] - y[r]);
    sst += (y[r] - 50.0) * (y[r] - 50.0);
  }
  EXPECT_GT(1.0 - sse / sst, 0.9);
}

TEST(Mlp, SingleClassIsDegenerate) {
  models::ModelSpec spec =
      Catalog::Default().DefaultSpec(Algorithm::kMlp, Task::kClassification, 3, 1, 0);
  try {
    FitMlp(spec, Matrix::Column(Vector{1, 2, 3}), Vector{0, 0, 0}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateTarget);
  }
}

}  // namespace
}  // namespace tabml::neural
