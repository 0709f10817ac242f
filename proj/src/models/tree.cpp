#include "tabml/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::models {

std::span<const double> Tree::Leaf(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes_[i].value;
}

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

nlohmann::json Tree::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    if (n.feature < 0) {
      nodes.push_back({{"v", n.value}});
    } else {
      nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
    }
  }
  return nodes;
}

Tree Tree::FromJson(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("f")) {
      node.feature = n.at("f").get<int>();
      node.threshold = n.at("t").get<double>();
      node.left = n.at("l").get<int>();
      node.right = n.at("r").get<int>();
    } else {
      node.value = n.at("v").get<Vector>();
    }
    nodes.push_back(std::move(node));
  }
  return Tree(std::move(nodes));
}

bool Tree::operator==(const Tree& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = other.nodes_[i];
    if (a.feature != b.feature || a.threshold != b.threshold || a.left != b.left ||
        a.right != b.right || a.value != b.value) {
      return false;
    }
  }
  return true;
}

namespace {

struct Split {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const TreeOptions& options, Rng* rng,
              const LeafValueFn& leaf_value)
      : x_(x), y_(y), options_(options), rng_(rng), leaf_value_(leaf_value) {}

  Tree Build(std::span<const std::size_t> rows) {
    std::vector<std::size_t> r(rows.begin(), rows.end());
    Grow(std::move(r), 0);
    return Tree(std::move(nodes_));
  }

 private:
  Vector LeafValue(const std::vector<std::size_t>& rows) const {
    if (leaf_value_) return leaf_value_(rows);
    if (options_.classification) {
      Vector freq(options_.num_classes, 0.0);
      for (std::size_t r : rows) freq[static_cast<std::size_t>(y_[r])] += 1.0;
      for (double& f : freq) f /= static_cast<double>(rows.size());
      return freq;
    }
    double s = 0.0;
    for (std::size_t r : rows) s += y_[r];
    return {s / static_cast<double>(rows.size())};
  }

  // Impurity of a node given its sufficient statistics.
  double Impurity(double n, const Vector& counts, double sum, double sum_sq) const {
    if (n <= 0.0) return 0.0;
    if (options_.classification) {
      double sq = 0.0;
      for (double c : counts) sq += c * c;
      return n - sq / n;
    }
    return sum_sq - sum * sum / n;
  }

  void EvaluateFeature(const std::vector<std::size_t>& rows, std::size_t f, double parent,
                       double y_center, Split& best) {
    std::vector<std::pair<double, double>> sorted(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sorted[i] = {x_(rows[i], f), y_[rows[i]] - y_center};
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (sorted.front().first == sorted.back().first) return;

    const double n = static_cast<double>(rows.size());
    Vector left_counts(options_.classification ? options_.num_classes : 0, 0.0);
    Vector right_counts = left_counts;
    double right_sum = 0.0;
    double right_sq = 0.0;
    for (const auto& [v, t] : sorted) {
      if (options_.classification) {
        right_counts[static_cast<std::size_t>(t + y_center)] += 1.0;
      } else {
        right_sum += t;
        right_sq += t * t;
      }
    }
    double left_sum = 0.0;
    double left_sq = 0.0;
    const double eps = 1e-12 * std::max(1.0, std::abs(parent));
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const double t = sorted[i].second;
      if (options_.classification) {
        const auto c = static_cast<std::size_t>(t + y_center);
        left_counts[c] += 1.0;
        right_counts[c] -= 1.0;
      } else {
        left_sum += t;
        left_sq += t * t;
        right_sum -= t;
        right_sq -= t * t;
      }
      const double v = sorted[i].first;
      const double next = sorted[i + 1].first;
      if (v == next) continue;
      const double nl = static_cast<double>(i + 1);
      const double decrease = parent - Impurity(nl, left_counts, left_sum, left_sq) -
                              Impurity(n - nl, right_counts, right_sum, right_sq);
      double threshold = v + (next - v) / 2.0;
      if (!(threshold < next)) threshold = v;
      bool better = !best.valid || decrease > best.decrease + eps;
      if (!better && best.valid && std::abs(decrease - best.decrease) <= eps) {
        better = f < best.feature || (f == best.feature && threshold < best.threshold);
      }
      if (better) best = Split{true, f, threshold, decrease};
    }
  }

  int Grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});

    const bool pure = std::all_of(rows.begin(), rows.end(),
                                  [&](std::size_t r) { return y_[r] == y_[rows.front()]; });
    const bool depth_reached = options_.max_depth > 0 && depth >= options_.max_depth;
    if (pure || depth_reached || rows.size() < options_.min_samples_split) {
      nodes_[static_cast<std::size_t>(index)].value = LeafValue(rows);
      return index;
    }

    const double n = static_cast<double>(rows.size());
    double y_center = 0.0;
    Vector counts(options_.classification ? options_.num_classes : 0, 0.0);
    double sum = 0.0;
    double sum_sq = 0.0;
    if (options_.classification) {
      for (std::size_t r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
    } else {
      for (std::size_t r : rows) y_center += y_[r];
      y_center /= n;
      for (std::size_t r : rows) {
        const double t = y_[r] - y_center;
        sum += t;
        sum_sq += t * t;
      }
    }
    const double parent = Impurity(n, counts, sum, sum_sq);
    const double center = options_.classification ? 0.0 : y_center;

    Split best;
    const std::size_t p = x_.cols();
    if (options_.max_features == 0 || options_.max_features >= p || rng_ == nullptr) {
      for (std::size_t f = 0; f < p; ++f) EvaluateFeature(rows, f, parent, center, best);
    } else {
      std::vector<std::size_t> order(p);
      std::iota(order.begin(), order.end(), 0);
      rng_->shuffle(order);
      for (std::size_t i = 0; i < p; ++i) {
        if (i >= options_.max_features && best.valid) break;
        EvaluateFeature(rows, order[i], parent, center, best);
      }
    }
    if (!best.valid) {
      nodes_[static_cast<std::size_t>(index)].value = LeafValue(rows);
      return index;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = Grow(std::move(left), depth + 1);
    const int r = Grow(std::move(right), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const TreeOptions& options_;
  Rng* rng_;
  const LeafValueFn& leaf_value_;
  std::vector<TreeNode> nodes_;
};

enum class EnsembleKind { kForest, kBoosting };

class TreeEnsembleModel final : public FittedModel {
 public:
  TreeEnsembleModel(ModelSpec spec, std::size_t num_features, std::size_t num_classes,
                    std::vector<Tree> trees, Vector init, double learning_rate, Vector loss_trace)
      : FittedModel(std::move(spec), num_features, num_classes),
        kind_(this->spec().algorithm == Algorithm::kRandomForest ? EnsembleKind::kForest
                                                                  : EnsembleKind::kBoosting),
        trees_(std::move(trees)),
        init_(std::move(init)),
        learning_rate_(learning_rate),
        loss_trace_(std::move(loss_trace)) {}

  const std::vector<Tree>& trees() const { return trees_; }
  const Vector& loss_trace() const { return loss_trace_; }

  // Raw additive scores of a boosting model, one column per output.
  Matrix Scores(const Matrix& x) const {
    const std::size_t outputs = init_.size();
    Matrix out(x.rows(), outputs);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      for (std::size_t k = 0; k < outputs; ++k) out(r, k) = init_[k];
      for (std::size_t t = 0; t < trees_.size(); ++t) {
        out(r, t % outputs) += learning_rate_ * trees_[t].Leaf(row)[0];
      }
    }
    return out;
  }

 protected:
  Vector Regress(const Matrix& x) const override {
    if (kind_ == EnsembleKind::kBoosting) return Scores(x).column(0);
    Vector out(x.rows(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double s = 0.0;
      for (const auto& tree : trees_) s += tree.Leaf(x.row(r))[0];
      out[r] = s / static_cast<double>(trees_.size());
    }
    return out;
  }

  Matrix Proba(const Matrix& x) const override {
    const std::size_t k = num_classes();
    if (kind_ == EnsembleKind::kForest) {
      Matrix out(x.rows(), k);
      const double w = 1.0 / static_cast<double>(trees_.size());
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (const auto& tree : trees_) {
          auto leaf = tree.Leaf(x.row(r));
          const auto vote = static_cast<std::size_t>(std::max_element(leaf.begin(), leaf.end()) -
                                                     leaf.begin());
          out(r, vote) += w;
        }
      }
      return out;
    }
    Matrix scores = Scores(x);
    if (k == 2) {
      Matrix out(x.rows(), 2);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double p1 = Sigmoid(scores(r, 0));
        out(r, 0) = 1.0 - p1;
        out(r, 1) = p1;
      }
      return out;
    }
    SoftmaxRows(scores);
    return scores;
  }

  nlohmann::json LearnedJson() const override {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.ToJson());
    nlohmann::json j = {{"trees", trees}};
    if (kind_ == EnsembleKind::kBoosting) {
      j["init"] = init_;
      j["learning_rate"] = learning_rate_;
      j["loss_trace"] = loss_trace_;
    }
    return j;
  }

 private:
  EnsembleKind kind_;
  std::vector<Tree> trees_;
  Vector init_;
  double learning_rate_;
  Vector loss_trace_;
};

double MeanSquaredError(std::span<const double> y, const Matrix& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f(i, 0)) * (y[i] - f(i, 0));
  return s / static_cast<double>(y.size());
}

double BinaryLogLoss(std::span<const double> y, const Matrix& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = f(i, 0);
    // log(1 + e^z) - y z
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    s += softplus - y[i] * z;
  }
  return s / static_cast<double>(y.size());
}

double MultiLogLoss(std::span<const double> y, const Matrix& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto row = f.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    s += mx + std::log(total) - row[static_cast<std::size_t>(y[i])];
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

Tree BuildTree(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
               const TreeOptions& options, Rng* rng, const LeafValueFn& leaf_value) {
  Require(!rows.empty(), ErrorCode::kEmptyMatrix, "cannot grow a tree on no rows");
  TreeBuilder builder(x, y, options, rng, leaf_value);
  return builder.Build(rows);
}

ModelPtr FitRandomForest(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                         std::size_t num_classes) {
  Require(x.rows() >= 2, ErrorCode::kTooFewRows, "random forest needs at least 2 rows");
  const std::size_t n_trees = spec.count_param("n_trees");
  Require(n_trees >= 1, ErrorCode::kInvalidHyperparameter, "random forest needs n_trees >= 1");
  const bool bootstrap = spec.param("bootstrap") != 0.0;
  TreeOptions options;
  options.classification = spec.task == Task::kClassification;
  options.num_classes = num_classes;
  options.max_depth = spec.count_param("max_depth");
  options.min_samples_split = spec.count_param("min_samples_split");
  options.max_features = spec.count_param("max_features");

  const std::size_t n = x.rows();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<Tree> trees;
  trees.reserve(n_trees);
  std::vector<std::size_t> sample(n);
  for (std::size_t t = 0; t < n_trees; ++t) {
    CheckDeadline();
    Rng rng(DeriveSeed(spec.seed, t));
    if (bootstrap) {
      for (std::size_t i = 0; i < n; ++i) sample[i] = rng.index(n);
    } else {
      sample = all;
    }
    trees.push_back(BuildTree(x, y, sample, options, &rng));
  }
  return std::make_shared<TreeEnsembleModel>(spec, x.cols(), num_classes, std::move(trees),
                                             Vector{}, 1.0, Vector{});
}

ModelPtr FitGradientBoosting(const ModelSpec& spec, const Matrix& x, std::span<const double> y,
                             std::size_t num_classes) {
  Require(x.rows() >= 2, ErrorCode::kTooFewRows, "gradient boosting needs at least 2 rows");
  const std::size_t stages = spec.count_param("n_stages");
  const double lr = spec.param("learning_rate");
  const std::size_t n = x.rows();
  const bool classification = spec.task == Task::kClassification;

  TreeOptions options;
  options.classification = false;  // every stage regresses on negative gradients
  options.max_depth = spec.count_param("max_depth");
  options.min_samples_split = spec.count_param("min_samples_split");

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  Vector init;
  if (!classification) {
    init = {std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n)};
  } else {
    const auto counts = preprocess::ClassCounts(y);
    const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
    Require(present >= 2, ErrorCode::kDegenerateTarget,
            "gradient boosting classification needs at least two classes");
    Vector prior(num_classes, 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      prior[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
    }
    if (num_classes == 2) {
      init = {std::log(prior[1] / prior[0])};
    } else {
      for (double p : prior) init.push_back(std::log(std::max(p, 1e-12)));
    }
  }
  const std::size_t outputs = init.size();

  Matrix scores(n, outputs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < outputs; ++k) scores(i, k) = init[k];
  }
  auto loss = [&]() {
    if (!classification) return MeanSquaredError(y, scores);
    return outputs == 1 ? BinaryLogLoss(y, scores) : MultiLogLoss(y, scores);
  };

  Vector trace = {loss()};
  std::vector<Tree> trees;
  Vector gradient(n);
  Vector hessian(n);
  Matrix proba;
  for (std::size_t stage = 0; stage < stages; ++stage) {
    CheckDeadline();
    if (classification && outputs > 1) {
      proba = scores;
      SoftmaxRows(proba);
    }
    for (std::size_t k = 0; k < outputs; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!classification) {
          gradient[i] = y[i] - scores(i, 0);
        } else if (outputs == 1) {
          const double p = Sigmoid(scores(i, 0));
          gradient[i] = y[i] - p;
          hessian[i] = p * (1.0 - p);
        } else {
          const double target = static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0;
          gradient[i] = target - proba(i, k);
          hessian[i] = proba(i, k) * (1.0 - proba(i, k));
        }
      }
      LeafValueFn newton = nullptr;
      if (classification) {
        const double factor = outputs == 1 ? 1.0
                                           : static_cast<double>(outputs - 1) /
                                                 static_cast<double>(outputs);
        newton = [&, factor](std::span<const std::size_t> rows) {
          double num = 0.0;
          double den = 0.0;
          for (std::size_t r : rows) {
            num += gradient[r];
            den += hessian[r];
          }
          return Vector{factor * num / std::max(den, 1e-12)};
        };
      }
      Tree tree = BuildTree(x, gradient, all, options, nullptr, newton);
      for (std::size_t i = 0; i < n; ++i) scores(i, k) += lr * tree.Leaf(x.row(i))[0];
      trees.push_back(std::move(tree));
    }
    trace.push_back(loss());
  }
  return std::make_shared<TreeEnsembleModel>(spec, x.cols(), classification ? num_classes : 0,
                                             std::move(trees), std::move(init), lr,
                                             std::move(trace));
}

ModelPtr LoadTreeEnsemble(const ModelSpec& spec, std::size_t num_features,
                          std::size_t num_classes, const nlohmann::json& learned) {
  std::vector<Tree> trees;
  for (const auto& t : learned.at("trees")) trees.push_back(Tree::FromJson(t));
  Vector init = learned.value("init", Vector{});
  const double lr = learned.value("learning_rate", 1.0);
  Vector trace = learned.value("loss_trace", Vector{});
  return std::make_shared<TreeEnsembleModel>(spec, num_features, num_classes, std::move(trees),
                                             std::move(init), lr, std::move(trace));
}

const Vector& BoostingLossTrace(const FittedModel& model) {
  const auto* m = dynamic_cast<const TreeEnsembleModel*>(&model);
  Require(m != nullptr && model.spec().algorithm == Algorithm::kGradientBoosting,
          ErrorCode::kInvalidConfig, "not a gradient boosting model");
  return m->loss_trace();
}

const std::vector<Tree>& EnsembleTrees(const FittedModel& model) {
  const auto* m = dynamic_cast<const TreeEnsembleModel*>(&model);
  Require(m != nullptr, ErrorCode::kInvalidConfig, "not a tree ensemble");
  return m->trees();
}

}  // namespace tabml::models
