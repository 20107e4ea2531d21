#include "advens/ensemble.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "advens/error.hpp"

namespace advens {
namespace {

Logits stabilized(const Logits& z) { return z.array() - z.maxCoeff(); }

int argmax_index(const Logits& z) { return z[1] > z[0] ? 1 : 0; }

}  // namespace

EnsembleModel::EnsembleModel(std::vector<MlpModel> bases, Eigen::VectorXd weights)
    : bases_(std::move(bases)) {
  if (bases_.empty()) throw ConfigError("an ensemble needs at least one base model");
  for (const auto& b : bases_) {
    if (b.input_dim() != bases_.front().input_dim()) throw ConfigError("base models disagree on input dimension");
  }
  set_weights(std::move(weights));
}

EnsembleModel::EnsembleModel(std::vector<MlpModel> bases)
    : EnsembleModel(bases, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(bases.size()),
                                                     bases.empty() ? 0.0 : 1.0 / static_cast<double>(bases.size()))) {}

void EnsembleModel::set_weights(Eigen::VectorXd w) {
  if (static_cast<std::size_t>(w.size()) != bases_.size()) throw ConfigError("weight count differs from base count");
  if (!on_simplex(w)) throw ConfigError("ensemble weights must be non-negative and sum to 1");
  weights_ = std::move(w);
}

std::vector<Logits> EnsembleModel::base_logits(const FeatureVector& x) const {
  std::vector<Logits> out;
  out.reserve(bases_.size());
  for (const auto& b : bases_) out.push_back(stabilized(b.logits(x)));
  return out;
}

Logits EnsembleModel::logits(const FeatureVector& x) const {
  Logits sum = Logits::Zero();
  for (std::size_t i = 0; i < bases_.size(); ++i) sum += weights_[static_cast<Eigen::Index>(i)] * stabilized(bases_[i].logits(x));
  return sum;
}

Logits EnsembleModel::base_logit_gradient(std::size_t i, const Logits& raw_base_logits,
                                          const Logits& logit_grad) const {
  Logits g = logit_grad;
  g[argmax_index(raw_base_logits)] -= logit_grad.sum();
  return weights_[static_cast<Eigen::Index>(i)] * g;
}

Eigen::VectorXd EnsembleModel::backprop_input(const FeatureVector& x, const Logits& logit_grad) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_dim()));
  for (std::size_t i = 0; i < bases_.size(); ++i) {
    if (weights_[static_cast<Eigen::Index>(i)] == 0.0) continue;
    const Logits g = base_logit_gradient(i, bases_[i].logits(x), logit_grad);
    total += bases_[i].backprop_input(x, g);
  }
  return total;
}

Logits ensemble_logits(const EnsembleModel& ensemble, const FeatureVector& x) { return ensemble.logits(x); }

bool on_simplex(const Eigen::VectorXd& w, double tol) {
  if (w.size() == 0) return false;
  if (!w.allFinite() || w.minCoeff() < 0.0) return false;
  return std::abs(w.sum() - 1.0) <= tol;
}

Eigen::VectorXd simplex_project(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw InputError("cannot project an empty vector onto the simplex");
  if (!v.allFinite()) throw InputError("simplex_project needs finite input");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

Eigen::VectorXd weight_gradient(const EnsembleModel& ensemble, std::span<const LabeledExample> data,
                                std::span<const FeatureVector> adversarial) {
  if (data.size() != adversarial.size()) throw InputError("weight_gradient: data and adversarial sizes differ");
  if (data.empty()) throw InputError("weight_gradient needs data");
  const auto l = static_cast<Eigen::Index>(ensemble.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(l);
  auto accumulate = [&](const FeatureVector& x, int y) {
    const auto zs = ensemble.base_logits(x);
    Logits mixed = Logits::Zero();
    for (Eigen::Index i = 0; i < l; ++i) mixed += ensemble.weights()[i] * zs[static_cast<std::size_t>(i)];
    const Logits g = loss_logit_gradient(mixed, y);
    for (Eigen::Index i = 0; i < l; ++i) grad[i] += g.dot(zs[static_cast<std::size_t>(i)]);
  };
  for (std::size_t n = 0; n < data.size(); ++n) {
    accumulate(data[n].x, data[n].y);
    accumulate(adversarial[n], data[n].y);
  }
  return grad / static_cast<double>(data.size());
}

EnsembleModel optimize_weights(const EnsembleModel& ensemble, std::span<const LabeledExample> data,
                               const InnerAttack& inner_attack, int steps, double beta,
                               const std::function<void(const Eigen::VectorXd&, double)>& on_step) {
  if (steps <= 0) throw ConfigError("optimize_weights needs steps > 0");
  if (!(beta > 0.0)) throw ConfigError("optimize_weights needs beta > 0");
  if (!inner_attack) throw ConfigError("optimize_weights needs an inner attack");
  EnsembleModel current = ensemble;
  for (int s = 0; s < steps; ++s) {
    const std::vector<FeatureVector> adversarial = inner_attack(current, data, s);
    const Eigen::VectorXd g = weight_gradient(current, data, adversarial);
    current.set_weights(simplex_project(current.weights() - beta * g));
    if (on_step) {
      double objective = 0.0;
      for (std::size_t n = 0; n < data.size(); ++n) {
        objective += loss(current, data[n].x, data[n].y) + loss(current, adversarial[n], data[n].y);
      }
      on_step(current.weights(), objective / static_cast<double>(data.size()));
    }
  }
  return current;
}

}  // namespace advens
