#ifndef TABML_MODELS_TREE_HPP_
#define TABML_MODELS_TREE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"
#include "tabml/core/random.hpp"
#include "tabml/models/model.hpp"

namespace tabml::models {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // rows with x[feature] <= threshold
  int right = -1;
  // Leaf payload: class frequencies (classification) or a single value.
  Vector value;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::span<const double> Leaf(std::span<const double> row) const;
  std::size_t depth() const;

  nlohmann::json ToJson() const;
  static Tree FromJson(const nlohmann::json& j);

  bool operator==(const Tree& other) const;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeOptions {
  bool classification = true;
  std::size_t num_classes = 0;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = all features at every split
};

// Overrides the value stored in a leaf, given the training rows it holds.
using LeafValueFn = std::function<Vector(std::span<const std::size_t> rows)>;

// Greedy CART. Splits maximize the Gini (classification) or squared-error
// (regression) decrease; thresholds are midpoints between consecutive
// distinct values; ties prefer the smaller feature index, then the smaller
// threshold. `rows` may contain repeats (bootstrap samples). `rng` is only
// consulted when max_features restricts the candidate set.
Tree BuildTree(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
               const TreeOptions& options, Rng* rng = nullptr,
               const LeafValueFn& leaf_value = nullptr);

ModelPtr FitRandomForest(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                         std::size_t num_classes);

ModelPtr FitGradientBoosting(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                             std::size_t num_classes);

ModelPtr LoadTreeEnsemble(const ModelSpec& spec, std::size_t num_features,
                          std::size_t num_classes, const nlohmann::json& learned);

// Training loss after initialization and after each boosting stage
// (mean squared error or mean log-loss), so the size is n_stages + 1.
const Vector& BoostingLossTrace(const FittedModel& model);

// Trees of a random forest or boosting model, in training order.
const std::vector<Tree>& EnsembleTrees(const FittedModel& model);

}  // namespace tabml::models

#endif  // TABML_MODELS_TREE_HPP_
