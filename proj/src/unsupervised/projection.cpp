#include "tabml/unsupervised/projection.hpp"

#include <cmath>

#include "tabml/core/error.hpp"
#include "tabml/unsupervised/eigen.hpp"

namespace tabml::unsupervised {

std::string_view KernelName(Kernel kernel) {
  return kernel == Kernel::kLinear ? "linear" : "rbf";
}

std::optional<Kernel> ParseKernel(std::string_view name) {
  if (name == "linear") return Kernel::kLinear;
  if (name == "rbf") return Kernel::kRbf;
  return std::nullopt;
}

double KernelValue(Kernel kernel, double gamma, std::span<const double> a,
                   std::span<const double> b) {
  if (kernel == Kernel::kLinear) return Dot(a, b);
  return std::exp(-gamma * SquaredDistance(a, b));
}

namespace {

Matrix KernelMatrix(const Matrix& x, Kernel kernel, double gamma) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = KernelValue(kernel, gamma, x.row(i), x.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

void DoubleCenter(Matrix& k, Vector& column_means, double& grand_mean) {
  const std::size_t n = k.rows();
  column_means = ColumnMeans(k);
  grand_mean = 0.0;
  for (double v : column_means) grand_mean += v;
  grand_mean /= static_cast<double>(n);
  // K is symmetric, so row means equal column means.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k(i, j) = k(i, j) - column_means[i] - column_means[j] + grand_mean;
    }
  }
}

}  // namespace

Matrix CenteredKernel(const Matrix& x, Kernel kernel, double gamma) {
  Matrix k = KernelMatrix(x, kernel, gamma);
  Vector means;
  double grand = 0.0;
  DoubleCenter(k, means, grand);
  return k;
}

ProjectionModel FitPca(const Matrix& x, std::size_t n_components) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Require(n > 0 && p > 0, ErrorCode::kEmptyMatrix, "pca needs data");
  Require(n_components >= 1 && n_components <= std::min(n, p), ErrorCode::kComponentCountTooLarge,
          "pca with " + std::to_string(n_components) + " components needs at most min(rows, features) = " +
              std::to_string(std::min(n, p)));
  ProjectionModel model;
  model.method = ProjectionMethod::kPca;
  model.mean = ColumnMeans(x);
  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double di = x(r, i) - model.mean[i];
      for (std::size_t j = i; j < p; ++j) cov(i, j) += di * (x(r, j) - model.mean[j]);
    }
  }
  const double denom = static_cast<double>(std::max<std::size_t>(n - 1, 1));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
    model.total_variance += cov(i, i);
  }
  SymmetricEigen eig = JacobiEigen(cov);
  model.components = Matrix(p, n_components);
  for (std::size_t c = 0; c < n_components; ++c) {
    model.explained_variance.push_back(std::max(eig.values[c], 0.0));
    for (std::size_t i = 0; i < p; ++i) model.components(i, c) = eig.vectors(i, c);
  }
  return model;
}

ProjectionModel FitKernelPca(const Matrix& x, std::size_t n_components, Kernel kernel,
                             std::optional<double> gamma) {
  const std::size_t n = x.rows();
  Require(n > 0 && x.cols() > 0, ErrorCode::kEmptyMatrix, "kernel pca needs data");
  Require(n_components >= 1 && n_components <= n, ErrorCode::kComponentCountTooLarge,
          "kernel pca with " + std::to_string(n_components) + " components needs at most " +
              std::to_string(n) + " rows");
  const double g = gamma.value_or(1.0 / static_cast<double>(x.cols()));
  Require(kernel == Kernel::kLinear || g > 0.0, ErrorCode::kNonPositiveGamma,
          "rbf gamma must be positive");

  ProjectionModel model;
  model.method = ProjectionMethod::kKernelPca;
  model.kernel = kernel;
  model.gamma = g;
  model.train = x;
  Matrix k = KernelMatrix(x, kernel, g);
  DoubleCenter(k, model.kernel_column_means, model.kernel_mean);
  SymmetricEigen eig = JacobiEigen(k);

  const double denom = static_cast<double>(std::max<std::size_t>(n - 1, 1));
  for (double v : eig.values) model.total_variance += std::max(v, 0.0) / denom;
  const double floor = 1e-12 * std::max(1.0, eig.values.front());
  model.components = Matrix(n, n_components);
  for (std::size_t c = 0; c < n_components; ++c) {
    const double lambda = eig.values[c];
    model.explained_variance.push_back(std::max(lambda, 0.0) / denom);
    if (lambda <= floor) continue;  // null direction projects to 0
    const double scale = 1.0 / std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i) model.components(i, c) = eig.vectors(i, c) * scale;
  }
  return model;
}

Matrix Project(const ProjectionModel& model, const Matrix& x) {
  if (model.method == ProjectionMethod::kPca) {
    Require(x.cols() == model.mean.size(), ErrorCode::kDimensionMismatch,
            "projection input width mismatch");
    Matrix centered = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) centered(r, c) -= model.mean[c];
    }
    return centered * model.components;
  }
  Require(x.cols() == model.train.cols(), ErrorCode::kDimensionMismatch,
          "projection input width mismatch");
  const std::size_t n = model.train.rows();
  Matrix out(x.rows(), model.num_components());
  Vector kx(n);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      kx[j] = KernelValue(model.kernel, model.gamma, x.row(r), model.train.row(j));
      mean += kx[j];
    }
    mean /= static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      kx[j] = kx[j] - mean - model.kernel_column_means[j] + model.kernel_mean;
    }
    for (std::size_t c = 0; c < model.num_components(); ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += kx[j] * model.components(j, c);
      out(r, c) = s;
    }
  }
  return out;
}

nlohmann::json ToJson(const ProjectionModel& model) {
  nlohmann::json j = {
      {"method", model.method == ProjectionMethod::kPca ? "pca" : "kernel_pca"},
      {"n_components", model.num_components()},
      {"explained_variance", model.explained_variance},
      {"total_variance", model.total_variance},
  };
  if (model.method == ProjectionMethod::kPca) {
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t c = 0; c < model.num_components(); ++c) comps.push_back(model.components.column(c));
    j["components"] = comps;
  } else {
    j["kernel"] = KernelName(model.kernel);
    if (model.kernel == Kernel::kRbf) j["gamma"] = model.gamma;
  }
  return j;
}

}  // namespace tabml::unsupervised
