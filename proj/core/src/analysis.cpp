#include "advens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advens/error.hpp"

namespace advens {

Theorem2Report theorem2_check(std::span<const double> ideal, std::span<const std::vector<double>> base_logits,
                              std::span<const double> weights) {
  if (ideal.empty()) throw InputError("theorem2_check needs at least one point");
  if (base_logits.empty()) throw InputError("theorem2_check needs at least one base model");
  if (weights.size() != base_logits.size()) throw InputError("theorem2_check: one weight per base is required");
  for (const auto& b : base_logits) {
    if (b.size() != ideal.size()) throw InputError("theorem2_check: base logit series differ in length from ideal");
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  if (!on_simplex(w)) throw InputError("theorem2_check: weights must lie on the simplex");

  const std::size_t l = base_logits.size();
  const auto n = static_cast<double>(ideal.size());
  Theorem2Report r;
  for (const auto& b : base_logits) {
    double sum = 0.0;
    for (std::size_t k = 0; k < ideal.size(); ++k) sum += ideal[k] - b[k];
    const double m = sum / n;
    r.mean_offsets.push_back(m);
    r.base_errors.push_back(m * m);
  }

  double mixed = 0.0;
  for (std::size_t i = 0; i < l; ++i) mixed += weights[i] * r.mean_offsets[i];
  r.error_ensemble = mixed * mixed;
  r.best_base_error = *std::min_element(r.base_errors.begin(), r.base_errors.end());
  r.bound = r.best_base_error / static_cast<double>(l);

  const bool any_zero = std::any_of(r.base_errors.begin(), r.base_errors.end(), [](double e) { return e == 0.0; });
  if (!any_zero) {
    double inv = 0.0;
    for (double e : r.base_errors) inv += 1.0 / e;
    r.optimal_weight_floor = 1.0 / inv;
  }

  double mse = 0.0;
  for (std::size_t k = 0; k < ideal.size(); ++k) {
    double z = 0.0;
    for (std::size_t i = 0; i < l; ++i) z += weights[i] * base_logits[i][k];
    mse += (ideal[k] - z) * (ideal[k] - z);
  }
  r.mean_square_error = mse / n;

  r.hypothesis_holds = true;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i != j && r.mean_offsets[i] * r.mean_offsets[j] < 0.0) r.hypothesis_holds = false;
    }
  }
  r.holds = r.error_ensemble >= r.bound - 1e-12;
  return r;
}

std::vector<double> optimal_weights(std::span<const double> base_errors) {
  if (base_errors.empty()) throw InputError("optimal_weights needs at least one base error");
  double inv = 0.0;
  for (double e : base_errors) {
    if (!(e > 0.0)) throw InputError("optimal_weights needs strictly positive base errors");
    inv += 1.0 / e;
  }
  std::vector<double> w;
  for (double e : base_errors) w.push_back((1.0 / inv) / e);
  return w;
}

std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("pearson_correlation: series differ in length");
  if (a.size() < 2) throw InputError("pearson_correlation needs at least two points");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorrelationStudy base_correlation_study(const EnsembleModel& ensemble, std::span<const FeatureVector> inputs) {
  const std::size_t l = ensemble.size();
  std::vector<std::vector<double>> series(l);
  for (const auto& x : inputs) {
    for (std::size_t i = 0; i < l; ++i) series[i].push_back(ensemble.bases()[i].logits(x)[kMalicious]);
  }
  CorrelationStudy study;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) {
      PairCorrelation p{i, j, pearson_correlation(series[i], series[j])};
      if (p.r) {
        ++study.defined;
        sum += *p.r;
        sum_sq += *p.r * *p.r;
      }
      study.pairs.push_back(p);
    }
  }
  if (study.defined > 0) {
    const auto k = static_cast<double>(study.defined);
    study.mean = sum / k;
    study.stddev = std::sqrt(std::max(0.0, sum_sq / k - study.mean * study.mean));
  }
  return study;
}

double mean_gradient_cosine(const EnsembleModel& ensemble, std::span<const LabeledExample> data) {
  double sum = 0.0;
  std::size_t count = 0;
  const std::size_t l = ensemble.size();
  for (const auto& ex : data) {
    std::vector<Eigen::VectorXd> grads;
    for (const auto& b : ensemble.bases()) grads.push_back(input_gradient(b, ex.x, ex.y));
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = i + 1; j < l; ++j) {
        const double ni = grads[i].norm(), nj = grads[j].norm();
        if (ni == 0.0 || nj == 0.0) continue;
        sum += grads[i].dot(grads[j]) / (ni * nj);
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace advens
