#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "advens/nn.hpp"

namespace advens {

// Logit ensemble: softmax(sum_i w_i (Z_i - max Z_i)) with w on the probability simplex.
class EnsembleModel final : public Classifier {
 public:
  // Throws ConfigError for an empty base list, mismatched input dimensions or weights off the simplex.
  EnsembleModel(std::vector<MlpModel> bases, Eigen::VectorXd weights);

  // Uniform weights.
  explicit EnsembleModel(std::vector<MlpModel> bases);

  const std::vector<MlpModel>& bases() const { return bases_; }
  std::vector<MlpModel>& mutable_bases() { return bases_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t size() const { return bases_.size(); }

  // Throws ConfigError if w is not in the simplex (tolerance 1e-9).
  void set_weights(Eigen::VectorXd w);

  std::size_t input_dim() const override { return bases_.front().input_dim(); }
  Logits logits(const FeatureVector& x) const override;
  Eigen::VectorXd backprop_input(const FeatureVector& x, const Logits& logit_grad) const override;

  // Z_i(x) - max Z_i(x) for every base.
  std::vector<Logits> base_logits(const FeatureVector& x) const;

  // Logit gradient seen by base i when logit_grad arrives at the ensemble output,
  // including the derivative of the max-shift.
  Logits base_logit_gradient(std::size_t i, const Logits& raw_base_logits, const Logits& logit_grad) const;

 private:
  std::vector<MlpModel> bases_;
  Eigen::VectorXd weights_;
};

Logits ensemble_logits(const EnsembleModel& ensemble, const FeatureVector& x);

bool on_simplex(const Eigen::VectorXd& w, double tol = 1e-9);

// Euclidean projection onto {w : 1'w = 1, w >= 0} (sort-based). Throws InputError on empty input.
Eigen::VectorXd simplex_project(const Eigen::VectorXd& v);

// Produces the adversarial counterparts of `data` against the current ensemble for
// weight step `step`. Examples the attacker leaves alone are returned as-is.
using InnerAttack =
    std::function<std::vector<FeatureVector>(const Classifier&, std::span<const LabeledExample>, int step)>;

// Gradient of J(w) = mean_n [L(F(x_n), y_n) + L(F(x'_n), y_n)] with respect to the weights.
Eigen::VectorXd weight_gradient(const EnsembleModel& ensemble, std::span<const LabeledExample> data,
                                std::span<const FeatureVector> adversarial);

// Runs `steps` iterations of w <- Proj_W(w - beta * grad_w J), recomputing the
// adversarial examples before each step. Base parameters stay frozen.
// `on_step` (optional) observes every iterate.
EnsembleModel optimize_weights(const EnsembleModel& ensemble, std::span<const LabeledExample> data,
                               const InnerAttack& inner_attack, int steps, double beta,
                               const std::function<void(const Eigen::VectorXd&, double)>& on_step = {});

}  // namespace advens
