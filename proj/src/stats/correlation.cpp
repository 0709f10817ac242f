#include "tabml/stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/error.hpp"

namespace tabml::stats {

std::string_view CorrelationMethodName(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::kPearson: return "pearson";
    case CorrelationMethod::kSpearman: return "spearman";
    case CorrelationMethod::kKendall: return "kendall";
  }
  return "unknown";
}

std::optional<CorrelationMethod> ParseCorrelationMethod(std::string_view name) {
  for (auto m : {CorrelationMethod::kPearson, CorrelationMethod::kSpearman,
                 CorrelationMethod::kKendall}) {
    if (CorrelationMethodName(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  Require(x.size() == y.size(), ErrorCode::kLengthMismatch,
          "correlation inputs differ in length (" + std::to_string(x.size()) + " vs " +
              std::to_string(y.size()) + ")");
  Require(x.size() >= 2, ErrorCode::kLengthMismatch, "correlation needs at least 2 values");
}

bool IsConstant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
}

double Clamp(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  Require(!IsConstant(x) && !IsConstant(y), ErrorCode::kConstantInput,
          "correlation is undefined for a constant input");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return Clamp(sxy / std::sqrt(sxx * syy));
}

Vector AverageRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  Vector ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  return Pearson(AverageRanks(x), AverageRanks(y));
}

double KendallTauB(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  Require(!IsConstant(x) && !IsConstant(y), ErrorCode::kConstantInput,
          "correlation is undefined for a constant input");
  double concordant = 0.0, discordant = 0.0, tie_x = 0.0, tie_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        tie_x += 1.0;
      } else if (dy == 0.0) {
        tie_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double base = concordant + discordant;
  return Clamp((concordant - discordant) / std::sqrt((base + tie_x) * (base + tie_y)));
}

double Correlation(std::span<const double> x, std::span<const double> y,
                   CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::kPearson: return Pearson(x, y);
    case CorrelationMethod::kSpearman: return Spearman(x, y);
    case CorrelationMethod::kKendall: return KendallTauB(x, y);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown correlation method");
}

CorrelationTable CorrelationMatrix(const Matrix& x, CorrelationMethod method) {
  Require(x.rows() >= 2, ErrorCode::kTooFewRows, "correlation matrix needs at least 2 rows");
  const std::size_t p = x.cols();
  std::vector<Vector> cols;
  std::vector<bool> constant;
  for (std::size_t c = 0; c < p; ++c) {
    cols.push_back(x.column(c));
    constant.push_back(IsConstant(cols.back()));
  }
  CorrelationTable out(p, std::vector<std::optional<double>>(p));
  for (std::size_t i = 0; i < p; ++i) {
    if (constant[i]) continue;
    out[i][i] = 1.0;
    for (std::size_t j = i + 1; j < p; ++j) {
      if (constant[j]) continue;
      const double r = Correlation(cols[i], cols[j], method);
      out[i][j] = r;
      out[j][i] = r;
    }
  }
  return out;
}

nlohmann::json ToJson(const CorrelationTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    rows.push_back(r);
  }
  return rows;
}

std::optional<Shape> DistributionShape(std::span<const double> x) {
  if (x.size() < 2 || IsConstant(x)) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  return Shape{m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace tabml::stats
