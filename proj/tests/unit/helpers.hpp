#pragma once

#include <vector>

#include "advens/nn.hpp"
#include "advens/perturb.hpp"
#include "advens/rng.hpp"

namespace advens::testing {

inline MlpModel random_model(std::vector<std::size_t> dims, std::uint64_t seed, double bias_scale = 0.1) {
  MlpModel m = init_params(dims, seed);
  Rng rng = make_rng(seed, {99});
  for (auto& layer : m.mutable_layers()) {
    for (auto& b : layer.bias.reshaped()) b = bias_scale * standard_normal(rng);
  }
  return m;
}

// Zero-hidden-layer model: logits = W x + b.
inline MlpModel linear_model(const Eigen::MatrixXd& w, const Eigen::Vector2d& b) {
  return MlpModel({static_cast<std::size_t>(w.cols()), 2}, {Layer{w, b}});
}

// Logit difference Z1 - Z0 = v . x + c, so the malware loss grows along -v.
inline MlpModel linear_score_model(const Eigen::VectorXd& v, double c) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, v.size());
  w.row(1) = v.transpose();
  return linear_model(w, Eigen::Vector2d(0.0, c));
}

inline MlpModel constant_model(std::size_t d, double z0, double z1) {
  return linear_model(Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(d)), Eigen::Vector2d(z0, z1));
}

inline FeatureVector random_binary(std::size_t d, Rng& rng, double p = 0.5) {
  FeatureVector x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = uniform01(rng) < p ? 1.0 : 0.0;
  return x;
}

inline ManipulationSpec random_spec(std::size_t d, Rng& rng) {
  ManipulationSpec s = ManipulationSpec::uniform(d, false, false);
  for (std::size_t i = 0; i < d; ++i) {
    s.can_add[i] = uniform01(rng) < 0.6;
    s.can_remove[i] = uniform01(rng) < 0.4;
  }
  return s;
}

inline FeatureVector bits(std::initializer_list<double> v) {
  FeatureVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double b : v) x[i++] = b;
  return x;
}

}  // namespace advens::testing
