#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "advens/attacks.hpp"
#include "advens/nn.hpp"
#include "advens/perturb.hpp"

namespace advens {

struct NamedModel {
  std::string name;
  const Classifier* model = nullptr;
};

struct NamedAttack {
  std::string name;
  AttackConfig config;
};

struct SuiteCell {
  std::string model;
  std::string attack;
  std::size_t examples = 0;
  std::size_t detected = 0;  // still classified malicious after the attack
  double accuracy = 0.0;     // percent
  double mean_l0 = 0.0;
  double mean_l1 = 0.0;
  std::vector<FeatureVector> adversarial;  // filled when requested
  std::vector<double> losses;              // per-example final loss, filled when requested
};

struct SuiteResult {
  std::vector<std::string> models;
  std::vector<std::string> attacks;
  std::vector<SuiteCell> cells;  // model-major

  const SuiteCell& cell(std::size_t model, std::size_t attack) const { return cells[model * attacks.size() + attack]; }
};

struct SuiteOptions {
  std::uint64_t seed = 0;
  bool keep_examples = false;
  // Cross-check every outcome for feasibility and success flags; violations throw InvariantError.
  bool verify = true;
};

// Runs every attack against every model on the given malware vectors (label 1). Example n
// of cell (m, a) draws from the substream (seed, m, a, n), so cells are independent.
SuiteResult run_attack_suite(std::span<const NamedModel> models, std::span<const NamedAttack> attacks,
                             std::span<const FeatureVector> malware, const ManipulationSpec& spec,
                             const AttackContext& ctx, const SuiteOptions& options);

// Percentages with two decimals; one row per attack, one column per model.
void write_suite_table(const SuiteResult& result, std::ostream& out);
// model,attack,examples,detected,accuracy,mean_l0,mean_l1
void write_suite_csv(const SuiteResult& result, std::ostream& out);

struct TransferResult {
  std::size_t examples = 0;
  std::size_t evaded = 0;
  double accuracy = 0.0;      // percent of examples no surrogate perturbation evades
  std::vector<bool> evaded_by_example;
};

// Crafts perturbations against each surrogate and queries the target with all of them.
// An example evades when any surrogate's perturbation is classified benign by the target.
// Throws ConfigError for an empty surrogate list, or when the target appears among the
// surrogates and allow_target_as_surrogate is false.
TransferResult transfer_attack(const Classifier& target, std::span<const Classifier* const> surrogates,
                               const AttackConfig& attack, std::span<const FeatureVector> malware,
                               const ManipulationSpec& spec, const AttackContext& ctx, std::uint64_t seed,
                               bool allow_target_as_surrogate = false);

}  // namespace advens
