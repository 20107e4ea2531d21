#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "advens/attacks.hpp"
#include "advens/ensemble.hpp"
#include "advens/nn.hpp"
#include "advens/perturb.hpp"

namespace advens {

enum class Regime { standard, at, ade, dade };

std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

struct TrainingConfig {
  Regime regime = Regime::standard;
  std::vector<std::size_t> hidden{160, 160};
  int epochs = 150;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;

  // Inner maximizers; at/ade/dade run the "max" selection over all of them. For dade,
  // maximizer i is also the private attacker of base i (i < l - 1).
  std::vector<AttackConfig> inner_maximizers;
  // Manipulation specs; attacks during training use their union.
  std::vector<ManipulationSpec> specs;

  double gamma = 0.0;              // dade diversity weight
  std::size_t ensemble_size = 5;   // l
  bool shared_base_init = false;   // every base starts from the same parameters

  // Ensemble weight pass after every epoch.
  int weight_steps = 5;
  double weight_beta = 0.01;
  std::size_t weight_batch = 0;  // 0 means batch_size

  // Multiplier on the clean loss term.
  double clean_weight = 1.0;

  // Keep the epoch with the best validation score instead of the last one.
  bool select_best = true;

  std::uint64_t seed = 0;

  // Throws ConfigError when the configuration is inconsistent.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double clean_loss = 0.0;
  double adv_loss = std::numeric_limits<double>::quiet_NaN();  // NaN for standard training
  double val_acc = std::numeric_limits<double>::quiet_NaN();
  double val_adv_acc = std::numeric_limits<double>::quiet_NaN();
  double diversity_loss = std::numeric_limits<double>::quiet_NaN();  // dade only
};

template <typename Model>
struct TrainingResult {
  Model model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Adversarial counterparts of a batch: malware examples get the loss-maximizing output
// of the max selection over `maximizers` on `spec`; benign examples pass through. The
// attack for example n draws from the substream (seed, n).
std::vector<FeatureVector> inner_maximize(const Classifier& model, std::span<const LabeledExample> batch,
                                          std::span<const AttackConfig> maximizers, const ManipulationSpec& spec,
                                          std::uint64_t seed, const AttackContext& ctx = {});

// Input dimension is taken from the data. `validation` may be empty, in which case the
// last epoch is kept. Throws InputError on empty training data.
TrainingResult<MlpModel> train_standard(std::span<const LabeledExample> train,
                                        std::span<const LabeledExample> validation, const TrainingConfig& cfg);
TrainingResult<MlpModel> train_adversarial(std::span<const LabeledExample> train,
                                           std::span<const LabeledExample> validation, const TrainingConfig& cfg);
TrainingResult<EnsembleModel> train_ade(std::span<const LabeledExample> train,
                                        std::span<const LabeledExample> validation, const TrainingConfig& cfg);
TrainingResult<EnsembleModel> train_dade(std::span<const LabeledExample> train,
                                         std::span<const LabeledExample> validation, const TrainingConfig& cfg);

// Fraction of examples whose predicted label equals y.
double accuracy(const Classifier& model, std::span<const LabeledExample> data);

// CSV with header epoch,clean_loss,adv_loss,val_acc,val_adv_acc; NaN cells are left empty.
void write_history_csv(std::span<const EpochRecord> history, std::ostream& out);

}  // namespace advens
