#include "advens/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "advens/error.hpp"
#include "advens/rng.hpp"

namespace advens {
namespace {

constexpr double kProbabilityFloor = 1e-12;

// Pre-activations of every layer plus the input, kept for backpropagation.
struct Trace {
  std::vector<Eigen::VectorXd> inputs;  // inputs[l] feeds layer l
  std::vector<Eigen::VectorXd> pre;     // pre[l] = W_l inputs[l] + b_l
};

Trace run_trace(const std::vector<Layer>& layers, const FeatureVector& x) {
  Trace t;
  t.inputs.reserve(layers.size());
  t.pre.reserve(layers.size());
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    t.inputs.push_back(a);
    Eigen::VectorXd z = layers[l].weight * a + layers[l].bias;
    if (l + 1 < layers.size()) a = z.cwiseMax(0.0);
    t.pre.push_back(std::move(z));
  }
  return t;
}

// Propagates delta (gradient w.r.t. pre-activation of layer l) one layer down.
// ReLU derivative at exactly zero is taken as zero.
Eigen::VectorXd through_layer(const Layer& layer, const Eigen::VectorXd& delta,
                              const Eigen::VectorXd* below_pre) {
  Eigen::VectorXd g = layer.weight.transpose() * delta;
  if (below_pre != nullptr) {
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if ((*below_pre)[i] <= 0.0) g[i] = 0.0;
    }
  }
  return g;
}

bool same_shape(const std::vector<Layer>& a, const std::vector<Layer>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weight.rows() != b[l].weight.rows() || a[l].weight.cols() != b[l].weight.cols() ||
        a[l].bias.size() != b[l].bias.size()) {
      return false;
    }
  }
  return true;
}

}  // namespace

Eigen::Vector2d softmax(const Logits& z) {
  const double m = z.maxCoeff();
  Eigen::Vector2d e((z[0] - m), (z[1] - m));
  e = e.array().exp();
  return e / e.sum();
}

double loss_from_logits(const Logits& z, int y) {
  const Eigen::Vector2d p = softmax(z);
  return -std::log(std::max(p[y], kProbabilityFloor));
}

Logits loss_logit_gradient(const Logits& z, int y) {
  Logits g = softmax(z);
  g[y] -= 1.0;
  return g;
}

int label_from_logits(const Logits& z) { return z[1] > z[0] ? kMalicious : kBenign; }

int predict(const Classifier& model, const FeatureVector& x) {
  return label_from_logits(model.logits(x));
}

double loss(const Classifier& model, const FeatureVector& x, int y) {
  return loss_from_logits(model.logits(x), y);
}

Eigen::VectorXd input_gradient(const Classifier& model, const FeatureVector& x, int y) {
  return model.backprop_input(x, loss_logit_gradient(model.logits(x), y));
}

Eigen::VectorXd benign_probability_gradient(const Classifier& model, const FeatureVector& x) {
  const Eigen::Vector2d p = softmax(model.logits(x));
  // dF0/dZ = F0 (e0 - F)
  const Logits g(p[0] * (1.0 - p[0]), -p[0] * p[1]);
  return model.backprop_input(x, g);
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims, std::vector<Layer> layers)
    : layer_dims_(std::move(layer_dims)), layers_(std::move(layers)) {
  if (layer_dims_.size() < 2) throw ConfigError("layer_dims needs an input and an output entry");
  if (layer_dims_.back() != 2) throw ConfigError("output dimension must be 2");
  for (auto d : layer_dims_) {
    if (d == 0) throw ConfigError("layer dimensions must be positive");
  }
  if (layers_.size() + 1 != layer_dims_.size()) throw ConfigError("layer count does not match layer_dims");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(layer_dims_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(layer_dims_[l]);
    if (layers_[l].weight.rows() != rows || layers_[l].weight.cols() != cols ||
        layers_[l].bias.size() != rows) {
      throw ConfigError("parameter shapes of layer " + std::to_string(l) + " do not match layer_dims");
    }
  }
}

void MlpModel::check_input(const FeatureVector& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw InputError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(input_dim()));
  }
}

Logits MlpModel::logits(const FeatureVector& x) const {
  check_input(x);
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weight * a + layers_[l].bias;
    a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return Logits(a[0], a[1]);
}

Eigen::VectorXd MlpModel::backprop_input(const FeatureVector& x, const Logits& logit_grad) const {
  check_input(x);
  const Trace t = run_trace(layers_, x);
  Eigen::VectorXd delta = logit_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    delta = through_layer(layers_[l], delta, l > 0 ? &t.pre[l - 1] : nullptr);
  }
  return delta;
}

void MlpModel::accumulate_param_gradient(const FeatureVector& x, const Logits& logit_grad,
                                         double scale, MlpGradient& grad) const {
  check_input(x);
  if (!same_shape(grad.layers, layers_)) throw InputError("gradient shape does not match model");
  const Trace t = run_trace(layers_, x);
  Eigen::VectorXd delta = logit_grad * scale;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    grad.layers[l].weight.noalias() += delta * t.inputs[l].transpose();
    grad.layers[l].bias += delta;
    if (l > 0) delta = through_layer(layers_[l], delta, &t.pre[l - 1]);
  }
}

MlpGradient MlpModel::zero_gradient() const {
  MlpGradient g;
  g.layers.reserve(layers_.size());
  for (const auto& layer : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                        Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return g;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layer_dims_ != b.layer_dims_ || !same_shape(a.layers_, b.layers_)) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weight != b.layers_[l].weight || a.layers_[l].bias != b.layers_[l].bias) return false;
  }
  return true;
}

MlpModel init_params(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw ConfigError("layer_dims needs an input and an output entry");
  for (auto d : layer_dims) {
    if (d == 0) throw ConfigError("layer dimensions must be positive");
  }
  if (layer_dims.back() != 2) throw ConfigError("output dimension must be 2");
  Rng rng = make_rng(seed, {0x1417});
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(layer_dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(layer_dims[l]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd::Zero(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = scale * standard_normal(rng);
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel({layer_dims.begin(), layer_dims.end()}, std::move(layers));
}

Logits forward(const MlpModel& model, const FeatureVector& x) { return model.logits(x); }

MlpGradient param_gradient(const MlpModel& model, std::span<const LabeledExample> batch) {
  if (batch.empty()) throw InputError("param_gradient needs a non-empty batch");
  MlpGradient g = model.zero_gradient();
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    model.accumulate_param_gradient(ex.x, loss_logit_gradient(model.logits(ex.x), ex.y), scale, g);
  }
  return g;
}

AdamState make_adam_state(const MlpModel& model, double learning_rate) {
  AdamState s;
  s.first_moment = model.zero_gradient();
  s.second_moment = model.zero_gradient();
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(AdamState& state, MlpModel& model, const MlpGradient& grads) {
  auto& layers = model.mutable_layers();
  if (!same_shape(grads.layers, layers) || !same_shape(state.first_moment.layers, layers) ||
      !same_shape(state.second_moment.layers, layers)) {
    throw InputError("adam_step: shapes of state, parameters and gradients differ");
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1, b2 = state.beta2, lr = state.learning_rate, eps = state.epsilon;

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, state.first_moment.layers[l].weight, state.second_moment.layers[l].weight,
           grads.layers[l].weight);
    update(layers[l].bias, state.first_moment.layers[l].bias, state.second_moment.layers[l].bias,
           grads.layers[l].bias);
  }
}

}  // namespace advens
