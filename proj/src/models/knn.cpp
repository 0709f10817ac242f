#include "tabml/models/knn.hpp"

#include <algorithm>
#include <utility>

#include "tabml/core/error.hpp"

namespace tabml::models {
namespace {

class KnnModel final : public FittedModel {
 public:
  KnnModel(ModelSpec spec, std::size_t num_classes, Matrix x, Vector y, std::size_t k)
      : FittedModel(std::move(spec), x.cols(), num_classes),
        x_(std::move(x)),
        y_(std::move(y)),
        k_(k) {}

 protected:
  Vector Regress(const Matrix& x) const override {
    Vector out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double s = 0.0;
      for (std::size_t i : NearestRows(x_, x.row(r), k_)) s += y_[i];
      out[r] = s / static_cast<double>(k_);
    }
    return out;
  }

  Matrix Proba(const Matrix& x) const override {
    Matrix out(x.rows(), num_classes());
    const double w = 1.0 / static_cast<double>(k_);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t i : NearestRows(x_, x.row(r), k_)) {
        out(r, static_cast<std::size_t>(y_[i])) += w;
      }
    }
    return out;
  }

  nlohmann::json LearnedJson() const override {
    return {{"k", k_}, {"x", internal::MatrixToJson(x_)}, {"y", y_}};
  }

 private:
  Matrix x_;
  Vector y_;
  std::size_t k_;
};

}  // namespace

std::vector<std::size_t> NearestRows(const Matrix& train, std::span<const double> query,
                                     std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    dist[i] = {SquaredDistance(train.row(i), query), i};
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

ModelPtr FitKnn(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                std::size_t num_classes) {
  const std::size_t k = spec.count_param("k");
  Require(k >= 1, ErrorCode::kInvalidHyperparameter, "knn needs k >= 1");
  Require(k <= x.rows(), ErrorCode::kKTooLarge,
          "k=" + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) + " training rows");
  return std::make_shared<KnnModel>(spec, num_classes, x, Vector(y.begin(), y.end()), k);
}

ModelPtr LoadKnn(const ModelSpec& spec, std::size_t num_features, std::size_t num_classes,
                 const nlohmann::json& learned) {
  Matrix x = internal::MatrixFromJson(learned.at("x"));
  Require(x.cols() == num_features, ErrorCode::kMalformedInput, "knn training width");
  return std::make_shared<KnnModel>(spec, num_classes, std::move(x), learned.at("y").get<Vector>(),
                                    learned.at("k").get<std::size_t>());
}

}  // namespace tabml::models
