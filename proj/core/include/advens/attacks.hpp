#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advens/nn.hpp"
#include "advens/perturb.hpp"
#include "advens/rng.hpp"

namespace advens {

enum class AttackMethod {
  none,  // identity; the "No Attack" baseline
  pgd_l1,
  pgd_l2,
  pgd_linf,
  pgd_adam,
  rfgsm,
  grosse,
  jsma,
  bca,
  bga,
  gdkde,
  mimicry,
  salt_pepper,
  pointwise,
  max,
  iter_max,
};

std::string_view to_string(AttackMethod m);
// Throws ConfigError for unknown names.
AttackMethod parse_attack_method(std::string_view name);

struct AttackConfig {
  AttackMethod method = AttackMethod::pgd_linf;
  int iterations = 100;
  double step_size = 0.01;
  bool random_start = false;  // pgd_adam: start uniformly inside the box

  double lambda = 100.0;    // gdkde density weight
  double bandwidth = 10.0;  // gdkde Laplacian kernel bandwidth

  int n_ben = 30;  // mimicry / pointwise guides

  int n_rept = 10;       // salt_pepper repetitions
  double eps_max = 1.0;  // salt_pepper largest noise fraction
  int n_s = 1000;        // salt_pepper sweep resolution

  int max_flips = 20;  // grosse: cap on total added features

  std::vector<AttackConfig> components;  // max / iter_max
  int rounds = 5;                        // iter_max
  double epsilon = 1e-9;                 // iter_max convergence threshold

  std::uint64_t seed = 0;

  // Throws ConfigError when a parameter is out of range.
  void validate() const;
};

// Attack-time settings used for the robustness evaluation.
AttackConfig attack_preset(AttackMethod m);
// Reduced budgets used as inner maximizers during adversarial training.
AttackConfig training_preset(AttackMethod m);
// {pgd_l1, pgd_l2, pgd_linf, pgd_adam} at the given budgets.
std::vector<AttackConfig> max_pgd_components(bool training_budget);

struct AttackOutcome {
  FeatureVector x_adv;
  bool success = false;  // predict(model, x_adv) != y
  double final_loss = 0.0;
  std::size_t l0 = 0;
  double l1 = 0.0;
  int iterations_used = 0;
};

// One attack instance. Bounds and perturbation sizes are always relative to `x`;
// `start` is where the search begins (equal to x unless attacks are chained).
struct AttackProblem {
  const FeatureVector& x;
  int y;
  const ManipulationSpec& spec;
  const FeatureVector& start;

  AttackProblem(const FeatureVector& x_, int y_, const ManipulationSpec& spec_)
      : x(x_), y(y_), spec(spec_), start(x_) {}
  AttackProblem(const FeatureVector& x_, int y_, const ManipulationSpec& spec_, const FeatureVector& start_)
      : x(x_), y(y_), spec(spec_), start(start_) {}
};

// Data some attacks draw on (benign guides for mimicry, density pool for gdkde).
struct AttackContext {
  std::span<const FeatureVector> benign_pool;
};

AttackOutcome make_outcome(const Classifier& model, const AttackProblem& p, FeatureVector x_adv, int iterations);

enum class PgdNorm { l1, l2, linf };

// Projected gradient ascent on the loss; returns the best rounded candidate seen.
AttackOutcome pgd(const Classifier& model, const AttackProblem& p, PgdNorm norm, const AttackConfig& cfg);

// Adam-driven ascent over the relaxed input.
AttackOutcome pgd_adam(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg, Rng& rng);

// l_inf PGD whose candidates are produced by randomized rounding.
AttackOutcome rfgsm(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg, Rng& rng);

enum class SaliencyVariant { grosse, jsma, bca };

// Adds one feature per iteration chosen by the variant's score.
AttackOutcome saliency_flip(const Classifier& model, const AttackProblem& p, SaliencyVariant variant,
                            int max_iters, int max_flips = -1);

AttackOutcome bga(const Classifier& model, const AttackProblem& p, int max_iters);

// (1/n) sum_b exp(-||x - b||_1 / bandwidth) and its gradient.
double laplacian_kde(const FeatureVector& x, std::span<const FeatureVector> pool, double bandwidth);
Eigen::VectorXd laplacian_kde_gradient(const FeatureVector& x, std::span<const FeatureVector> pool, double bandwidth);

AttackOutcome gdkde(const Classifier& model, const AttackProblem& p, std::span<const FeatureVector> benign_pool,
                    const AttackConfig& cfg);

AttackOutcome mimicry(const Classifier& model, const AttackProblem& p, std::span<const FeatureVector> benign_pool,
                      int n_ben, Rng& rng);

AttackOutcome salt_pepper(const Classifier& model, const AttackProblem& p, int n_rept, double eps_max, int n_s,
                          Rng& rng);

// Shrinks an adversarial example by reverting coordinates to x while it stays
// misclassified. Throws InputError if x_adv is infeasible.
AttackOutcome pointwise(const Classifier& model, const AttackProblem& p, const FeatureVector& x_adv, Rng& rng);

// Dispatches on cfg.method.
AttackOutcome run_attack(const Classifier& model, const AttackProblem& p, const AttackConfig& cfg,
                         const AttackContext& ctx, Rng& rng);

// Every (method, spec) pair is run; the pair maximizing the loss wins, ties going to
// the first listed. `component_losses`, when given, receives the loss of every pair
// in method-major order.
AttackOutcome max_attack(const Classifier& model, const AttackProblem& p, std::span<const AttackConfig> methods,
                         std::span<const ManipulationSpec> specs, const AttackContext& ctx, Rng& rng,
                         std::vector<double>* component_losses = nullptr);

// Repeats the max selection from the previous round's output for up to n_rounds, stopping
// once the loss changes by less than epsilon. `round_losses` receives L(x'_k) per round.
AttackOutcome iter_max_attack(const Classifier& model, const AttackProblem& p, std::span<const AttackConfig> methods,
                              std::span<const ManipulationSpec> specs, int n_rounds, double epsilon,
                              const AttackContext& ctx, Rng& rng, std::vector<double>* round_losses = nullptr);

}  // namespace advens
