#include "advens/training.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <utility>

#include "advens/error.hpp"
#include "advens/serialize.hpp"

namespace advens {
namespace {

// Substream tags; every random decision in training hangs off (seed, tag, ...).
enum : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kAttack = 3,
  kBaseAttack = 4,
  kValAttack = 5,
  kWeights = 6,
  kWeightAttack = 7,
};

constexpr std::array<std::pair<Regime, std::string_view>, 4> kRegimeNames{{
    {Regime::standard, "standard"},
    {Regime::at, "at"},
    {Regime::ade, "ade"},
    {Regime::dade, "dade"},
}};

struct Setup {
  std::vector<std::size_t> dims;
  ManipulationSpec spec;  // union of cfg.specs (adversarial regimes only)
};

Setup prepare(std::span<const LabeledExample> train, std::span<const LabeledExample> validation,
              const TrainingConfig& cfg, Regime expected) {
  cfg.validate();
  if (cfg.regime != expected) {
    throw ConfigError("regime '" + std::string(to_string(cfg.regime)) + "' passed to the " +
                      std::string(to_string(expected)) + " trainer");
  }
  if (train.empty()) throw InputError("training data is empty");
  const auto d = train.front().x.size();
  if (d == 0) throw InputError("training examples have no features");
  auto check = [d](std::span<const LabeledExample> data, const char* what) {
    for (const auto& ex : data) {
      if (ex.x.size() != d) throw InputError(std::string(what) + " example has inconsistent dimension");
      if (ex.y != kBenign && ex.y != kMalicious) throw InputError(std::string(what) + " label must be 0 or 1");
    }
  };
  check(train, "training");
  check(validation, "validation");

  Setup s;
  s.dims.push_back(static_cast<std::size_t>(d));
  s.dims.insert(s.dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  s.dims.push_back(2);
  if (expected != Regime::standard) {
    s.spec = union_specs(cfg.specs);
    if (s.spec.dim() != static_cast<std::size_t>(d)) throw InputError("manipulation spec dimension differs from data");
  }
  return s;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                   int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {kShuffle, static_cast<std::uint64_t>(epoch)});
  shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const auto stop = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

std::vector<LabeledExample> gather(std::span<const LabeledExample> data, const std::vector<std::size_t>& idx) {
  std::vector<LabeledExample> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data[i]);
  return out;
}

// dst = a * dst + b * src, layer by layer.
void combine(MlpGradient& dst, double a, const MlpGradient& src, double b) {
  for (std::size_t l = 0; l < dst.layers.size(); ++l) {
    dst.layers[l].weight = a * dst.layers[l].weight + b * src.layers[l].weight;
    dst.layers[l].bias = a * dst.layers[l].bias + b * src.layers[l].bias;
  }
}

// Accumulates the mean loss gradient of `inputs` (labels from `batch`) into `grad`;
// returns the summed loss.
double accumulate(const MlpModel& model, std::span<const LabeledExample> batch,
                  std::span<const FeatureVector> inputs, MlpGradient& grad) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const Logits z = model.logits(inputs[n]);
    total += loss_from_logits(z, batch[n].y);
    model.accumulate_param_gradient(inputs[n], loss_logit_gradient(z, batch[n].y), scale, grad);
  }
  return total;
}

double accumulate(const EnsembleModel& ens, std::span<const LabeledExample> batch,
                  std::span<const FeatureVector> inputs, std::vector<MlpGradient>& grads) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  std::vector<Logits> raw(ens.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    Logits mixed = Logits::Zero();
    for (std::size_t i = 0; i < ens.size(); ++i) {
      raw[i] = ens.bases()[i].logits(inputs[n]);
      mixed += ens.weights()[static_cast<Eigen::Index>(i)] * (raw[i].array() - raw[i].maxCoeff()).matrix();
    }
    total += loss_from_logits(mixed, batch[n].y);
    const Logits g = loss_logit_gradient(mixed, batch[n].y);
    for (std::size_t i = 0; i < ens.size(); ++i) {
      if (ens.weights()[static_cast<Eigen::Index>(i)] == 0.0) continue;
      ens.bases()[i].accumulate_param_gradient(inputs[n], ens.base_logit_gradient(i, raw[i], g), scale, grads[i]);
    }
  }
  return total;
}

std::vector<FeatureVector> inputs_of(std::span<const LabeledExample> batch) {
  std::vector<FeatureVector> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(ex.x);
  return out;
}

// Validation accuracy and, for adversarial regimes, accuracy on inner-maximized
// validation examples. Returns the selection score.
double validate_epoch(const Classifier& model, std::span<const LabeledExample> validation, const TrainingConfig& cfg,
                      const ManipulationSpec& spec, int epoch, EpochRecord& rec) {
  if (validation.empty()) return 0.0;
  rec.val_acc = accuracy(model, validation);
  if (cfg.regime == Regime::standard) return rec.val_acc;
  const auto adv = inner_maximize(model, validation, cfg.inner_maximizers, spec,
                                  derive_seed(cfg.seed, {kValAttack, static_cast<std::uint64_t>(epoch)}));
  std::vector<LabeledExample> adv_set;
  adv_set.reserve(validation.size());
  for (std::size_t n = 0; n < validation.size(); ++n) adv_set.push_back({adv[n], validation[n].y});
  rec.val_adv_acc = accuracy(model, adv_set);
  return 0.5 * (rec.val_acc + rec.val_adv_acc);
}

template <typename Model>
void keep_if_better(TrainingResult<Model>& result, const Model& model, double score, double& best_score, int epoch,
                    const TrainingConfig& cfg, bool have_validation) {
  const bool take = !cfg.select_best || !have_validation || result.best_epoch == 0 || score > best_score;
  if (take) {
    result.model = model;
    result.best_epoch = epoch;
    best_score = score;
  }
}

TrainingResult<MlpModel> train_single(std::span<const LabeledExample> train,
                                      std::span<const LabeledExample> validation, const TrainingConfig& cfg,
                                      Regime regime) {
  const Setup setup = prepare(train, validation, cfg, regime);
  const bool adversarial = regime != Regime::standard;
  MlpModel model = init_params(setup.dims, derive_seed(cfg.seed, {kInit, 0}));
  AdamState adam = make_adam_state(model, cfg.learning_rate);

  TrainingResult<MlpModel> result;
  double best_score = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    double clean_sum = 0.0, adv_sum = 0.0;
    const auto batches = make_batches(train.size(), cfg.batch_size, cfg.seed, epoch);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto batch = gather(train, batches[b]);
      MlpGradient clean_grad = model.zero_gradient();
      clean_sum += accumulate(model, batch, inputs_of(batch), clean_grad);
      if (adversarial) {
        const auto adv = inner_maximize(model, batch, cfg.inner_maximizers, setup.spec,
                                        derive_seed(cfg.seed, {kAttack, static_cast<std::uint64_t>(epoch), b}));
        MlpGradient adv_grad = model.zero_gradient();
        adv_sum += accumulate(model, batch, adv, adv_grad);
        combine(clean_grad, cfg.clean_weight, adv_grad, 1.0);
      } else if (cfg.clean_weight != 1.0) {
        combine(clean_grad, cfg.clean_weight, clean_grad, 0.0);
      }
      adam_step(adam, model, clean_grad);
    }
    const auto n = static_cast<double>(train.size());
    rec.clean_loss = clean_sum / n;
    if (adversarial) rec.adv_loss = adv_sum / n;
    const double score = validate_epoch(model, validation, cfg, setup.spec, epoch, rec);
    result.history.push_back(rec);
    keep_if_better(result, model, score, best_score, epoch, cfg, !validation.empty());
  }
  return result;
}

TrainingResult<EnsembleModel> train_ensemble(std::span<const LabeledExample> train,
                                             std::span<const LabeledExample> validation, const TrainingConfig& cfg,
                                             Regime regime) {
  const Setup setup = prepare(train, validation, cfg, regime);
  const std::size_t l = cfg.ensemble_size;
  std::vector<MlpModel> bases;
  for (std::size_t i = 0; i < l; ++i) {
    bases.push_back(init_params(setup.dims, derive_seed(cfg.seed, {kInit, cfg.shared_base_init ? 0 : i})));
  }
  EnsembleModel ens(std::move(bases));
  std::vector<AdamState> adam;
  for (const auto& b : ens.bases()) adam.push_back(make_adam_state(b, cfg.learning_rate));

  const bool diversify = regime == Regime::dade;
  const std::size_t weight_batch = std::min(train.size(), cfg.weight_batch == 0 ? cfg.batch_size : cfg.weight_batch);

  TrainingResult<EnsembleModel> result{ens, {}, 0};
  double best_score = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto e = static_cast<std::uint64_t>(epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    double clean_sum = 0.0, adv_sum = 0.0, div_sum = 0.0;
    const auto batches = make_batches(train.size(), cfg.batch_size, cfg.seed, epoch);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto batch = gather(train, batches[b]);
      const auto clean_inputs = inputs_of(batch);
      std::vector<MlpGradient> clean_grads, adv_grads;
      for (const auto& base : ens.bases()) {
        clean_grads.push_back(base.zero_gradient());
        adv_grads.push_back(base.zero_gradient());
      }
      clean_sum += accumulate(ens, batch, clean_inputs, clean_grads);
      const auto adv = inner_maximize(ens, batch, cfg.inner_maximizers, setup.spec, derive_seed(cfg.seed, {kAttack, e, b}));
      adv_sum += accumulate(ens, batch, adv, adv_grads);

      std::vector<MlpGradient> div_grads;
      if (diversify) {
        for (std::size_t i = 0; i < l; ++i) {
          const MlpModel& base = ens.bases()[i];
          MlpGradient g = base.zero_gradient();
          if (i + 1 < l) {
            const std::span<const AttackConfig> own(&cfg.inner_maximizers[i], 1);
            const auto base_adv =
                inner_maximize(base, batch, own, setup.spec, derive_seed(cfg.seed, {kBaseAttack, e, b, i}));
            div_sum += accumulate(base, batch, base_adv, g);
          } else {
            div_sum += accumulate(base, batch, clean_inputs, g);
          }
          div_grads.push_back(std::move(g));
        }
      }

      for (std::size_t i = 0; i < l; ++i) {
        combine(clean_grads[i], cfg.clean_weight, adv_grads[i], 1.0);
        if (diversify && cfg.gamma != 0.0) combine(clean_grads[i], 1.0, div_grads[i], cfg.gamma);
        adam_step(adam[i], ens.mutable_bases()[i], clean_grads[i]);
      }
    }

    // weight pass on a random subset of the training data
    Rng wrng = make_rng(cfg.seed, {kWeights, e});
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < weight_batch; ++k) std::swap(order[k], order[k + uniform_index(wrng, order.size() - k)]);
    order.resize(weight_batch);
    const auto subset = gather(train, order);
    const InnerAttack inner = [&](const Classifier& model, std::span<const LabeledExample> data, int step) {
      return inner_maximize(model, data, cfg.inner_maximizers, setup.spec,
                            derive_seed(cfg.seed, {kWeightAttack, e, static_cast<std::uint64_t>(step)}));
    };
    ens = optimize_weights(ens, subset, inner, cfg.weight_steps, cfg.weight_beta);

    const auto n = static_cast<double>(train.size());
    rec.clean_loss = clean_sum / n;
    rec.adv_loss = adv_sum / n;
    if (diversify) rec.diversity_loss = div_sum / n;
    const double score = validate_epoch(ens, validation, cfg, setup.spec, epoch, rec);
    result.history.push_back(rec);
    keep_if_better(result, ens, score, best_score, epoch, cfg, !validation.empty());
  }
  return result;
}

}  // namespace

std::string_view to_string(Regime r) {
  for (const auto& [regime, name] : kRegimeNames) {
    if (regime == r) return name;
  }
  return "unknown";
}

Regime parse_regime(std::string_view name) {
  for (const auto& [regime, n] : kRegimeNames) {
    if (n == name) return regime;
  }
  throw ConfigError("unknown training regime '" + std::string(name) + "'");
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden layer widths must be positive");
  }
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (gamma != 0.0 && regime != Regime::dade) throw ConfigError("gamma is only used by the dade regime");
  if (!(clean_weight >= 0.0)) throw ConfigError("clean_weight must be >= 0");
  if (regime == Regime::standard) return;

  if (inner_maximizers.empty()) throw ConfigError("adversarial training needs at least one inner maximizer");
  for (const auto& m : inner_maximizers) m.validate();
  if (specs.empty()) throw ConfigError("adversarial training needs at least one manipulation spec");
  if (regime == Regime::ade || regime == Regime::dade) {
    if (ensemble_size < 2) throw ConfigError("ensemble regimes need ensemble_size >= 2");
    if (weight_steps < 1) throw ConfigError("weight_steps must be >= 1");
    if (!(weight_beta > 0.0)) throw ConfigError("weight_beta must be > 0");
  }
  if (regime == Regime::dade && inner_maximizers.size() + 1 < ensemble_size) {
    throw ConfigError("dade needs at least ensemble_size - 1 inner maximizers");
  }
}

std::vector<FeatureVector> inner_maximize(const Classifier& model, std::span<const LabeledExample> batch,
                                          std::span<const AttackConfig> maximizers, const ManipulationSpec& spec,
                                          std::uint64_t seed, const AttackContext& ctx) {
  if (maximizers.empty()) throw ConfigError("inner_maximize needs at least one maximizer");
  const std::array<ManipulationSpec, 1> specs{spec};
  std::vector<FeatureVector> out;
  out.reserve(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto& ex = batch[n];
    if (ex.y != kMalicious) {
      out.push_back(ex.x);
      continue;
    }
    Rng rng = make_rng(seed, {n});
    out.push_back(max_attack(model, AttackProblem(ex.x, ex.y, spec), maximizers, specs, ctx, rng).x_adv);
  }
  return out;
}

TrainingResult<MlpModel> train_standard(std::span<const LabeledExample> train,
                                        std::span<const LabeledExample> validation, const TrainingConfig& cfg) {
  return train_single(train, validation, cfg, Regime::standard);
}

TrainingResult<MlpModel> train_adversarial(std::span<const LabeledExample> train,
                                           std::span<const LabeledExample> validation, const TrainingConfig& cfg) {
  return train_single(train, validation, cfg, Regime::at);
}

TrainingResult<EnsembleModel> train_ade(std::span<const LabeledExample> train,
                                        std::span<const LabeledExample> validation, const TrainingConfig& cfg) {
  return train_ensemble(train, validation, cfg, Regime::ade);
}

TrainingResult<EnsembleModel> train_dade(std::span<const LabeledExample> train,
                                         std::span<const LabeledExample> validation, const TrainingConfig& cfg) {
  return train_ensemble(train, validation, cfg, Regime::dade);
}

double accuracy(const Classifier& model, std::span<const LabeledExample> data) {
  if (data.empty()) throw InputError("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (const auto& ex : data) correct += predict(model, ex.x) == ex.y ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void write_history_csv(std::span<const EpochRecord> history, std::ostream& out) {
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  out << "epoch,clean_loss,adv_loss,val_acc,val_adv_acc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << cell(r.clean_loss) << ',' << cell(r.adv_loss) << ',' << cell(r.val_acc) << ','
        << cell(r.val_adv_acc) << '\n';
  }
}

}  // namespace advens
