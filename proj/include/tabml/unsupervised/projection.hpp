#ifndef TABML_UNSUPERVISED_PROJECTION_HPP_
#define TABML_UNSUPERVISED_PROJECTION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"

namespace tabml::unsupervised {

enum class ProjectionMethod { kPca, kKernelPca };
enum class Kernel { kLinear, kRbf };

std::string_view KernelName(Kernel kernel);
std::optional<Kernel> ParseKernel(std::string_view name);

struct ProjectionModel {
  ProjectionMethod method = ProjectionMethod::kPca;
  // PCA: n_features x n_components. Kernel PCA: n_rows x n_components dual
  // coefficients, already divided by sqrt(eigenvalue).
  Matrix components;
  Vector explained_variance;
  double total_variance = 0.0;
  Vector mean;  // PCA column means

  Kernel kernel = Kernel::kRbf;
  double gamma = 0.0;
  Matrix train;          // kernel PCA training rows
  Vector kernel_column_means;
  double kernel_mean = 0.0;

  std::size_t num_components() const { return components.cols(); }
};

ProjectionModel FitPca(const Matrix& x, std::size_t n_components);

// gamma defaults to 1 / n_features; only used by the rbf kernel.
ProjectionModel FitKernelPca(const Matrix& x, std::size_t n_components, Kernel kernel,
                             std::optional<double> gamma = std::nullopt);

Matrix Project(const ProjectionModel& model, const Matrix& x);

double KernelValue(Kernel kernel, double gamma, std::span<const double> a,
                   std::span<const double> b);

// Double-centered kernel matrix of the rows of x.
Matrix CenteredKernel(const Matrix& x, Kernel kernel, double gamma);

nlohmann::json ToJson(const ProjectionModel& model);

}  // namespace tabml::unsupervised

#endif  // TABML_UNSUPERVISED_PROJECTION_HPP_
