#ifndef TABML_STATS_CORRELATION_HPP_
#define TABML_STATS_CORRELATION_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"

namespace tabml::stats {

enum class CorrelationMethod { kPearson, kSpearman, kKendall };

std::string_view CorrelationMethodName(CorrelationMethod method);
std::optional<CorrelationMethod> ParseCorrelationMethod(std::string_view name);

// Each throws LengthMismatch for unequal or too short (< 2) inputs and
// ConstantInput when a side has no variation.
double Pearson(std::span<const double> x, std::span<const double> y);
double Spearman(std::span<const double> x, std::span<const double> y);
// Tau-b by pair enumeration.
double KendallTauB(std::span<const double> x, std::span<const double> y);
double Correlation(std::span<const double> x, std::span<const double> y,
                   CorrelationMethod method);

// 1-based ranks; tied values share the mean of their positions.
Vector AverageRanks(std::span<const double> x);

// Symmetric matrix of column correlations; entries involving a constant
// column are nullopt.
using CorrelationTable = std::vector<std::vector<std::optional<double>>>;
CorrelationTable CorrelationMatrix(const Matrix& x, CorrelationMethod method);

nlohmann::json ToJson(const CorrelationTable& table);

struct Shape {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

// Population moment estimates; nullopt for constant input.
std::optional<Shape> DistributionShape(std::span<const double> x);

}  // namespace tabml::stats

#endif  // TABML_STATS_CORRELATION_HPP_
