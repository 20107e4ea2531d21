#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "advens/ensemble.hpp"
#include "advens/nn.hpp"

namespace advens {

// Lower bound on the logit error of a weighted ensemble relative to an ideal model.
// The offset of base i is eta_i(x) = ideal(x) - base_i(x); E(eta_i) is its mean over the
// supplied points and the error of a model is the squared mean offset E(eta)^2.
struct Theorem2Report {
  std::vector<double> mean_offsets;  // E(eta_i)
  std::vector<double> base_errors;   // E(eta_i)^2
  double error_ensemble = 0.0;       // (sum_i w_i E(eta_i))^2
  double best_base_error = 0.0;      // min_i E(eta_i)^2
  double bound = 0.0;                // best_base_error / l
  double optimal_weight_floor = 0.0; // (sum_i 1 / E(eta_i)^2)^-1, 0 if some E(eta_i) = 0
  double mean_square_error = 0.0;    // E[(ideal - sum_i w_i base_i)^2], reported only
  bool hypothesis_holds = false;     // E(eta_i) E(eta_j) >= 0 for all i != j
  bool holds = false;                // error_ensemble >= bound - 1e-12
};

// ideal[n] and base_logits[i][n] are the logits of the ideal model and base i at point n.
// Throws InputError on length mismatches, empty input or weights off the simplex.
Theorem2Report theorem2_check(std::span<const double> ideal, std::span<const std::vector<double>> base_logits,
                              std::span<const double> weights);

// Minimizer of sum_i w_i^2 E(eta_i)^2 over the simplex: w_i proportional to 1 / E(eta_i)^2.
// Throws InputError if any base error is zero.
std::vector<double> optimal_weights(std::span<const double> base_errors);

// Pearson correlation; nullopt when either series has zero variance.
// Throws InputError for unequal lengths or fewer than two points.
std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b);

struct PairCorrelation {
  std::size_t i = 0, j = 0;
  std::optional<double> r;
};

struct CorrelationStudy {
  std::vector<PairCorrelation> pairs;
  double mean = 0.0;  // over defined pairs
  double stddev = 0.0;
  std::size_t defined = 0;
};

// Pairwise correlation of the bases' label-1 logits over the given inputs.
CorrelationStudy base_correlation_study(const EnsembleModel& ensemble, std::span<const FeatureVector> inputs);

// Mean over inputs and base pairs of the cosine similarity between the bases' loss
// gradients with respect to the input; pairs with a zero gradient are skipped.
double mean_gradient_cosine(const EnsembleModel& ensemble, std::span<const LabeledExample> data);

}  // namespace advens
