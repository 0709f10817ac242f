#include "tabml/neural/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/preprocess/sampler.hpp"

namespace tabml::neural {

std::size_t MlpShape::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) n += layers[l + 1] * (layers[l] + 1);
  return n;
}

MlpShape MakeShape(std::size_t inputs, std::size_t hidden_layers, std::size_t hidden_units,
                   std::size_t outputs, bool classification) {
  MlpShape shape;
  shape.classification = classification;
  shape.layers.push_back(inputs);
  for (std::size_t i = 0; i < hidden_layers; ++i) shape.layers.push_back(hidden_units);
  shape.layers.push_back(outputs);
  return shape;
}

Vector XavierInit(const MlpShape& shape, Rng& rng) {
  Vector params;
  params.reserve(shape.num_params());
  for (std::size_t l = 0; l + 1 < shape.layers.size(); ++l) {
    const std::size_t in = shape.layers[l];
    const std::size_t out = shape.layers[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (std::size_t i = 0; i < in * out; ++i) params.push_back(rng.uniform(-limit, limit));
    params.insert(params.end(), out, 0.0);
  }
  return params;
}

namespace {

// Activations of every layer for one input row; the last entry holds the
// pre-softmax scores (classification) or the output (regression).
void ForwardRow(const MlpShape& shape, std::span<const double> params,
                std::span<const double> row, std::vector<Vector>& act) {
  const std::size_t depth = shape.layers.size();
  act.resize(depth);
  act[0].assign(row.begin(), row.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    const std::size_t in = shape.layers[l];
    const std::size_t out = shape.layers[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    act[l + 1].assign(out, 0.0);
    const bool hidden = l + 2 < depth;
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * act[l][i];
      act[l + 1][o] = hidden ? std::max(z, 0.0) : z;
    }
    offset += out * (in + 1);
  }
}

void Softmax(Vector& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& e : v) {
    e = std::exp(e - mx);
    total += e;
  }
  for (double& e : v) e /= total;
}

}  // namespace

Matrix Forward(const MlpShape& shape, std::span<const double> params, const Matrix& x) {
  Require(x.cols() == shape.layers.front(), ErrorCode::kDimensionMismatch,
          "mlp input width mismatch");
  Matrix out(x.rows(), shape.layers.back());
  std::vector<Vector> act;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    ForwardRow(shape, params, x.row(r), act);
    Vector& o = act.back();
    if (shape.classification) Softmax(o);
    for (std::size_t k = 0; k < o.size(); ++k) out(r, k) = o[k];
  }
  return out;
}

double Loss(const MlpShape& shape, std::span<const double> params, const Matrix& x,
            std::span<const double> y, std::span<const std::size_t> rows, Vector* gradient) {
  Require(!rows.empty(), ErrorCode::kEmptyMatrix, "mlp loss over no rows");
  Require(params.size() == shape.num_params(), ErrorCode::kDimensionMismatch,
          "mlp parameter count mismatch");
  const std::size_t depth = shape.layers.size();
  const double scale = 1.0 / static_cast<double>(rows.size());
  if (gradient != nullptr) gradient->assign(params.size(), 0.0);

  std::vector<std::size_t> offsets(depth - 1, 0);
  for (std::size_t l = 1; l + 1 < depth; ++l) {
    offsets[l] = offsets[l - 1] + shape.layers[l] * (shape.layers[l - 1] + 1);
  }

  std::vector<Vector> act;
  Vector delta;
  Vector prev_delta;
  double loss = 0.0;
  for (std::size_t r : rows) {
    ForwardRow(shape, params, x.row(r), act);
    Vector& out = act.back();
    if (shape.classification) {
      const auto target = static_cast<std::size_t>(y[r]);
      const double mx = *std::max_element(out.begin(), out.end());
      double total = 0.0;
      for (double v : out) total += std::exp(v - mx);
      loss += mx + std::log(total) - out[target];
      if (gradient == nullptr) continue;
      delta.resize(out.size());
      for (std::size_t k = 0; k < out.size(); ++k) {
        delta[k] = std::exp(out[k] - mx) / total - (k == target ? 1.0 : 0.0);
      }
    } else {
      const double d = out[0] - y[r];
      loss += d * d;
      if (gradient == nullptr) continue;
      delta.assign(1, 2.0 * d);
    }

    for (std::size_t l = depth - 1; l-- > 0;) {
      const std::size_t in = shape.layers[l];
      const std::size_t out_w = shape.layers[l + 1];
      const double* w = params.data() + offsets[l];
      double* gw = gradient->data() + offsets[l];
      double* gb = gw + in * out_w;
      for (std::size_t o = 0; o < out_w; ++o) {
        const double d = delta[o] * scale;
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += d * act[l][i];
        gb[o] += d;
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        if (act[l][i] <= 0.0) continue;  // ReLU derivative
        double s = 0.0;
        for (std::size_t o = 0; o < out_w; ++o) s += w[o * in + i] * delta[o];
        prev_delta[i] = s;
      }
      delta.swap(prev_delta);
    }
  }
  return loss * scale;
}

double Loss(const MlpShape& shape, std::span<const double> params, const Matrix& x,
            std::span<const double> y, Vector* gradient) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return Loss(shape, params, x, y, rows, gradient);
}

namespace {

class MlpModel final : public models::FittedModel {
 public:
  MlpModel(models::ModelSpec spec, std::size_t num_features, std::size_t num_classes,
           MlpShape shape, Vector params, double y_mean, double y_scale, Vector loss_trace)
      : FittedModel(std::move(spec), num_features, num_classes),
        shape_(std::move(shape)),
        params_(std::move(params)),
        y_mean_(y_mean),
        y_scale_(y_scale),
        loss_trace_(std::move(loss_trace)) {}

  const Vector& loss_trace() const { return loss_trace_; }

 protected:
  Vector Regress(const Matrix& x) const override {
    Vector out = Forward(shape_, params_, x).column(0);
    for (double& v : out) v = y_mean_ + y_scale_ * v;
    return out;
  }

  Matrix Proba(const Matrix& x) const override { return Forward(shape_, params_, x); }

  nlohmann::json LearnedJson() const override {
    return {{"layers", shape_.layers},
            {"params", params_},
            {"y_mean", y_mean_},
            {"y_scale", y_scale_},
            {"loss_trace", loss_trace_}};
  }

 private:
  MlpShape shape_;
  Vector params_;
  double y_mean_;
  double y_scale_;
  Vector loss_trace_;
};

}  // namespace

models::ModelPtr FitMlp(const models::ModelSpec& spec, const Matrix& x, std::span<const double> y,
                        std::size_t num_classes) {
  const std::size_t n = x.rows();
  Require(n >= 2, ErrorCode::kTooFewRows, "mlp needs at least 2 rows");
  const bool classification = spec.task == data::Task::kClassification;
  const std::size_t epochs = spec.count_param("epochs");
  const std::size_t batch = std::max<std::size_t>(1, spec.count_param("batch_size"));
  const double lr = spec.param("learning_rate");

  Vector target(y.begin(), y.end());
  double y_mean = 0.0;
  double y_scale = 1.0;
  if (classification) {
    const auto counts = preprocess::ClassCounts(y);
    const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
    Require(present >= 2, ErrorCode::kDegenerateTarget, "mlp classification needs two classes");
  } else {
    // Regress on the standardized target so the step size is scale free.
    y_mean = std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : target) var += (v - y_mean) * (v - y_mean);
    var /= static_cast<double>(n);
    if (var > 0.0) y_scale = std::sqrt(var);
    for (double& v : target) v = (v - y_mean) / y_scale;
  }

  MlpShape shape = MakeShape(x.cols(), spec.count_param("hidden_layers"),
                             spec.count_param("hidden_units"), classification ? num_classes : 1,
                             classification);
  Rng rng(spec.seed);
  Vector params = XavierInit(shape, rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vector gradient;
  Vector trace;
  trace.reserve(epochs);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    CheckDeadline();
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      Loss(shape, params, x, target, rows, &gradient);
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * gradient[i];
    }
    trace.push_back(Loss(shape, params, x, target));
  }
  return std::make_shared<MlpModel>(spec, x.cols(), classification ? num_classes : 0,
                                    std::move(shape), std::move(params), y_mean, y_scale,
                                    std::move(trace));
}

models::ModelPtr LoadMlp(const models::ModelSpec& spec, std::size_t num_features,
                         std::size_t num_classes, const nlohmann::json& learned) {
  MlpShape shape;
  shape.layers = learned.at("layers").get<std::vector<std::size_t>>();
  shape.classification = spec.task == data::Task::kClassification;
  Vector params = learned.at("params").get<Vector>();
  Require(shape.layers.size() >= 2 && shape.layers.front() == num_features &&
              params.size() == shape.num_params(),
          ErrorCode::kMalformedInput, "mlp payload shape");
  return std::make_shared<MlpModel>(spec, num_features, num_classes, std::move(shape),
                                    std::move(params), learned.at("y_mean").get<double>(),
                                    learned.at("y_scale").get<double>(),
                                    learned.value("loss_trace", Vector{}));
}

const Vector& MlpLossTrace(const models::FittedModel& model) {
  const auto* m = dynamic_cast<const MlpModel*>(&model);
  Require(m != nullptr, ErrorCode::kInvalidConfig, "not an mlp model");
  return m->loss_trace();
}

}  // namespace tabml::neural
