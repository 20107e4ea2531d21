#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace advens {

// Binary feature vectors are stored as doubles in {0, 1} so they feed the networks
// directly; continuous relaxations produced by attacks share the same type.
using FeatureVector = Eigen::VectorXd;

// Raw pre-softmax outputs for the two labels {0 benign, 1 malicious}.
using Logits = Eigen::Vector2d;

inline constexpr int kBenign = 0;
inline constexpr int kMalicious = 1;

struct LabeledExample {
  FeatureVector x;
  int y = kBenign;
};

// Anything that maps a feature vector to two logits and can backpropagate a logit
// gradient to the input. Implemented by MlpModel and EnsembleModel; attacks and
// metrics only see this interface.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t input_dim() const = 0;
  virtual Logits logits(const FeatureVector& x) const = 0;
  // Returns d(logit_grad . logits(x)) / dx.
  virtual Eigen::VectorXd backprop_input(const FeatureVector& x, const Logits& logit_grad) const = 0;
};

// Softmax after the Z - max(Z) shift.
Eigen::Vector2d softmax(const Logits& z);

// Cross-entropy of the stabilized softmax, with the probability floored at 1e-12.
double loss_from_logits(const Logits& z, int y);

// Gradient of -log softmax_y(z) with respect to z: softmax(z) - onehot(y).
Logits loss_logit_gradient(const Logits& z, int y);

// Argmax of the softmax; ties resolve to label 0.
int label_from_logits(const Logits& z);

int predict(const Classifier& model, const FeatureVector& x);
double loss(const Classifier& model, const FeatureVector& x, int y);
Eigen::VectorXd input_gradient(const Classifier& model, const FeatureVector& x, int y);

// Gradient of the benign-class softmax probability with respect to x.
Eigen::VectorXd benign_probability_gradient(const Classifier& model, const FeatureVector& x);

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Per-layer tensors mirroring a model's parameters.
struct MlpGradient {
  std::vector<Layer> layers;
};

// Fully connected ReLU network with identity output layer and exactly two outputs.
class MlpModel final : public Classifier {
 public:
  MlpModel() = default;
  // Throws ConfigError unless shapes agree with layer_dims and the last entry is 2.
  MlpModel(std::vector<std::size_t> layer_dims, std::vector<Layer> layers);

  const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  std::size_t input_dim() const override { return layer_dims_.empty() ? 0 : layer_dims_.front(); }
  Logits logits(const FeatureVector& x) const override;
  Eigen::VectorXd backprop_input(const FeatureVector& x, const Logits& logit_grad) const override;

  // grad += scale * d(logit_grad . logits(x)) / dtheta.
  void accumulate_param_gradient(const FeatureVector& x, const Logits& logit_grad, double scale,
                                 MlpGradient& grad) const;

  MlpGradient zero_gradient() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  void check_input(const FeatureVector& x) const;

  std::vector<std::size_t> layer_dims_;
  std::vector<Layer> layers_;
};

// Weights ~ N(0, 1/fan_in), biases zero. Deterministic in seed.
MlpModel init_params(std::span<const std::size_t> layer_dims, std::uint64_t seed);

// Raw logits Z(x) of a single network.
Logits forward(const MlpModel& model, const FeatureVector& x);

// Mean cross-entropy gradient over a non-empty batch.
MlpGradient param_gradient(const MlpModel& model, std::span<const LabeledExample> batch);

struct AdamState {
  std::uint64_t step_count = 0;
  MlpGradient first_moment;
  MlpGradient second_moment;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const MlpModel& model, double learning_rate);

// Bias-corrected Adam descent step. Throws InputError on shape mismatch.
void adam_step(AdamState& state, MlpModel& model, const MlpGradient& grads);

}  // namespace advens
