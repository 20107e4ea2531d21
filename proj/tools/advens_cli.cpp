// advens: command-line front end for data generation, training and attack evaluation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advens/analysis.hpp"
#include "advens/attacks.hpp"
#include "advens/config.hpp"
#include "advens/dataset.hpp"
#include "advens/error.hpp"
#include "advens/metrics.hpp"
#include "advens/serialize.hpp"
#include "advens/suite.hpp"
#include "advens/training.hpp"

namespace fs = std::filesystem;
using namespace advens;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kInvariant = 4 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = ".";
  std::string data;
  std::string model;
  std::string suite;
  std::string split = "test";
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

Dataset load_splits(const fs::path& dir) {
  Dataset all;
  for (auto s : {Split::train, Split::validation, Split::test}) {
    const fs::path file = dir / (std::string(to_string(s)) + ".txt");
    if (fs::exists(file)) append_split(all, load_dataset(file, s), s);
  }
  if (all.examples.empty()) throw InputError("no train/validation/test files found in " + dir.string());
  return all;
}

Split parse_split(const std::string& name) {
  for (auto s : {Split::train, Split::validation, Split::test}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown split '" + name + "'");
}

ManipulationSpec load_union_spec(const std::vector<fs::path>& paths, const fs::path& data_dir) {
  std::vector<ManipulationSpec> specs;
  for (const auto& p : paths) specs.push_back(load_spec(p));
  if (specs.empty()) specs.push_back(load_spec(data_dir / "spec.txt"));
  return union_specs(specs);
}

IniDocument load_config_or_empty(const std::string& path) {
  return path.empty() ? IniDocument{} : load_ini(path);
}

fs::path dir_of(const std::string& file) { return file.empty() ? fs::path() : fs::path(file).parent_path(); }

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

int cmd_gen_data(const Common& c) {
  const SyntheticConfig sc = synthetic_from_ini(load_config_or_empty(c.config));
  const std::uint64_t seed = c.seed.value_or(0);
  const SyntheticData syn = generate_synthetic(sc.d, sc.n_per_class, sc.separation, sc.profile, seed);
  const fs::path out(c.out);
  fs::create_directories(out);
  for (auto s : {Split::train, Split::validation, Split::test}) {
    save_dataset(syn.data, out / (std::string(to_string(s)) + ".txt"), s);
  }
  save_spec(syn.spec, out / "spec.txt");
  std::cout << "wrote " << syn.data.examples.size() << " examples (d=" << sc.d << ") to " << out.string() << '\n';
  return kOk;
}

int cmd_train(const Common& c) {
  require(c.data, "--data");
  require(c.config, "--config");
  TrainingFile tf = training_from_ini(load_ini(c.config), dir_of(c.config));
  if (c.seed) tf.config.seed = *c.seed;
  const fs::path data_dir(c.data);
  const Dataset data = load_splits(data_dir);
  const auto train = data.subset(Split::train);
  const auto validation = data.subset(Split::validation);
  if (tf.config.regime != Regime::standard) tf.config.specs = {load_union_spec(tf.spec_paths, data_dir)};

  const fs::path out(c.out);
  fs::create_directories(out);
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  switch (tf.config.regime) {
    case Regime::standard:
    case Regime::at: {
      auto r = tf.config.regime == Regime::standard ? train_standard(train, validation, tf.config)
                                                     : train_adversarial(train, validation, tf.config);
      save_mlp(r.model, out / "model.mlp");
      history = std::move(r.history);
      best_epoch = r.best_epoch;
      break;
    }
    case Regime::ade:
    case Regime::dade: {
      auto r = tf.config.regime == Regime::ade ? train_ade(train, validation, tf.config)
                                                : train_dade(train, validation, tf.config);
      save_ensemble(r.model, out / "model");
      history = std::move(r.history);
      best_epoch = r.best_epoch;
      break;
    }
  }
  auto csv = open_out(out / "history.csv");
  write_history_csv(history, csv);
  std::cout << "trained " << to_string(tf.config.regime) << " model, selected epoch " << best_epoch << '\n';
  return kOk;
}

int cmd_evaluate(const Common& c) {
  require(c.data, "--data");
  require(c.model, "--model");
  const Dataset data = load_splits(c.data);
  const auto model = load_classifier(c.model);
  const auto split = data.subset(parse_split(c.split));
  const MetricsReport m = evaluate(*model, split);
  fs::create_directories(c.out);
  auto csv = open_out(fs::path(c.out) / "metrics.csv");
  csv << "split,tp,tn,fp,fn,fnr,fpr,acc,bacc,f1,undefined\n";
  std::string flags;
  auto flag = [&flags](bool on, const char* name) {
    if (on) flags += (flags.empty() ? "" : ";") + std::string(name);
  };
  flag(m.fnr_undefined, "fnr");
  flag(m.fpr_undefined, "fpr");
  flag(m.bacc_undefined, "bacc");
  flag(m.f1_undefined, "f1");
  csv << c.split << ',' << m.tp << ',' << m.tn << ',' << m.fp << ',' << m.fn << ',' << format_double(m.fnr) << ','
      << format_double(m.fpr) << ',' << format_double(m.acc) << ',' << format_double(m.bacc) << ','
      << format_double(m.f1) << ',' << flags << '\n';
  std::printf("FNR %.3f%%  FPR %.3f%%  Acc %.3f%%  bAcc %.3f%%  F1 %.3f%%\n", m.fnr, m.fpr, m.acc, m.bacc, m.f1);
  return kOk;
}

struct LoadedSuite {
  SuiteFile file;
  std::vector<std::unique_ptr<Classifier>> owned;
  std::vector<NamedModel> models;
};

LoadedSuite load_suite(const Common& c) {
  const std::string path = c.suite.empty() ? c.config : c.suite;
  require(path, "--suite");
  LoadedSuite s;
  s.file = suite_from_ini(load_ini(path), dir_of(path));
  if (c.seed) s.file.seed = *c.seed;
  if (s.file.models.empty()) throw ConfigError("suite file lists no [model] sections");
  for (const auto& [name, model_path] : s.file.models) {
    s.owned.push_back(load_classifier(model_path));
    s.models.push_back({name, s.owned.back().get()});
  }
  if (s.file.attacks.empty()) {
    for (auto m : {AttackMethod::none, AttackMethod::pgd_l1, AttackMethod::pgd_l2, AttackMethod::pgd_linf,
                   AttackMethod::pgd_adam, AttackMethod::max, AttackMethod::iter_max}) {
      s.file.attacks.push_back({std::string(to_string(m)), attack_preset(m)});
    }
  }
  return s;
}

int cmd_attack(const Common& c) {
  require(c.data, "--data");
  LoadedSuite s = load_suite(c);
  const Dataset data = load_splits(c.data);
  const ManipulationSpec spec = load_union_spec(s.file.spec_paths, c.data);
  const auto malware = select_malware(data, Split::test, s.file.subset, s.file.seed);
  const auto pool = benign_vectors(data, Split::train);
  SuiteOptions options;
  options.seed = s.file.seed;
  const SuiteResult result = run_attack_suite(s.models, s.file.attacks, malware, spec, {pool}, options);

  fs::create_directories(c.out);
  auto csv = open_out(fs::path(c.out) / "suite.csv");
  write_suite_csv(result, csv);
  auto table = open_out(fs::path(c.out) / "suite.txt");
  write_suite_table(result, table);
  write_suite_table(result, std::cout);
  return kOk;
}

int cmd_transfer(const Common& c) {
  require(c.data, "--data");
  LoadedSuite s = load_suite(c);
  if (s.models.size() < 2 && s.file.surrogates.empty()) throw ConfigError("transfer needs at least two models");
  const Dataset data = load_splits(c.data);
  const ManipulationSpec spec = load_union_spec(s.file.spec_paths, c.data);
  const auto malware = select_malware(data, Split::test, s.file.subset, s.file.seed);
  const auto pool = benign_vectors(data, Split::train);

  std::map<std::string, const Classifier*> by_name;
  for (const auto& m : s.models) by_name[m.name] = m.model;
  auto lookup = [&by_name](const std::string& name) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("unknown model '" + name + "'");
    return it->second;
  };

  std::vector<std::string> targets;
  if (!s.file.target.empty()) {
    targets.push_back(s.file.target);
  } else {
    for (const auto& m : s.models) targets.push_back(m.name);
  }

  fs::create_directories(c.out);
  auto csv = open_out(fs::path(c.out) / "transfer.csv");
  csv << "target,attack,surrogates,examples,evaded,accuracy\n";
  for (const auto& target : targets) {
    std::vector<std::string> names = s.file.surrogates;
    if (names.empty()) {
      for (const auto& m : s.models) {
        if (m.name != target) names.push_back(m.name);
      }
    }
    std::vector<const Classifier*> surrogates;
    std::string joined;
    for (const auto& n : names) {
      surrogates.push_back(lookup(n));
      joined += (joined.empty() ? "" : ";") + n;
    }
    for (std::size_t a = 0; a < s.file.attacks.size(); ++a) {
      const auto& attack = s.file.attacks[a];
      const TransferResult r = transfer_attack(*lookup(target), surrogates, attack.config, malware, spec, {pool},
                                               derive_seed(s.file.seed, {a}));
      csv << target << ',' << attack.name << ',' << joined << ',' << r.examples << ',' << r.evaded << ','
          << format_double(r.accuracy) << '\n';
      std::printf("%-12s %-16s %7.2f%%\n", target.c_str(), attack.name.c_str(), r.accuracy);
    }
  }
  return kOk;
}

int cmd_check_theorems(const Common& c) {
  const IniDocument doc = load_config_or_empty(c.config);
  std::size_t trials = 1000, bases = 3, points = 20, examples = 200;
  for (const auto& e : doc.root.entries) {
    const auto v = static_cast<std::size_t>(std::stoull(e.value));
    if (e.key == "trials") trials = v;
    else if (e.key == "bases") bases = v;
    else if (e.key == "points") points = v;
    else if (e.key == "examples") examples = v;
    else throw ConfigError("line " + std::to_string(e.line) + ": unknown key " + e.key);
  }
  if (bases < 1 || points < 1) throw ConfigError("bases and points must be positive");
  const std::uint64_t seed = c.seed.value_or(0);
  fs::create_directories(c.out);

  // Random constructions: all base offsets share a sign so the hypothesis holds.
  auto csv = open_out(fs::path(c.out) / "ensemble_bound.csv");
  csv << "trial,bases,error_ensemble,bound,hypothesis,holds\n";
  std::size_t held = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, {2, t});
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    std::vector<double> ideal(points);
    for (auto& v : ideal) v = standard_normal(rng);
    std::vector<std::vector<double>> base(bases, std::vector<double>(points));
    for (std::size_t i = 0; i < bases; ++i) {
      const double offset = sign * uniform01(rng) * 2.0;
      for (std::size_t k = 0; k < points; ++k) base[i][k] = ideal[k] - offset + 0.3 * standard_normal(rng);
    }
    Eigen::VectorXd raw(static_cast<Eigen::Index>(bases));
    for (auto& v : raw) v = uniform01(rng);
    const Eigen::VectorXd w = simplex_project(raw);
    const std::vector<double> weights(w.data(), w.data() + w.size());
    const Theorem2Report r = theorem2_check(ideal, base, weights);
    if (r.holds) ++held;
    csv << t << ',' << bases << ',' << format_double(r.error_ensemble) << ',' << format_double(r.bound) << ','
        << (r.hypothesis_holds ? 1 : 0) << ',' << (r.holds ? 1 : 0) << '\n';
  }
  std::cout << "ensemble error bound held in " << held << " of " << trials << " constructions\n";

  if (!c.model.empty() && !c.data.empty()) {
    const auto model = load_classifier(c.model);
    const Dataset data = load_splits(c.data);
    const auto malware = select_malware(data, Split::test, examples, seed);
    const auto d = static_cast<std::size_t>(data.d);
    const ManipulationSpec narrow = ManipulationSpec::uniform(d, true, false);
    const ManipulationSpec wide = ManipulationSpec::uniform(d, true, true);
    const AttackConfig cfg = attack_preset(AttackMethod::pgd_l1);
    auto t1 = open_out(fs::path(c.out) / "monotonicity.csv");
    t1 << "example,loss_add_only,loss_add_remove,monotone\n";
    std::size_t monotone = 0;
    for (std::size_t n = 0; n < malware.size(); ++n) {
      const double a = pgd(*model, AttackProblem(malware[n], kMalicious, narrow), PgdNorm::l1, cfg).final_loss;
      const double b = pgd(*model, AttackProblem(malware[n], kMalicious, wide), PgdNorm::l1, cfg).final_loss;
      if (b >= a) ++monotone;
      t1 << n << ',' << format_double(a) << ',' << format_double(b) << ',' << (b >= a ? 1 : 0) << '\n';
    }
    std::cout << "spec monotonicity held on " << monotone << " of " << malware.size() << " examples\n";
  }
  return held == trials ? kOk : kInvariant;
}

int cmd_correlate(const Common& c) {
  require(c.data, "--data");
  require(c.model, "--model");
  const IniDocument doc = load_config_or_empty(c.config);
  AttackConfig attack = attack_preset(AttackMethod::max);
  std::size_t subset = 800;
  for (const auto& e : doc.root.entries) {
    if (e.key == "attack") attack = attack_preset(parse_attack_method(e.value));
    else if (e.key == "subset") subset = static_cast<std::size_t>(std::stoull(e.value));
    else throw ConfigError("line " + std::to_string(e.line) + ": unknown key " + e.key);
  }
  const std::uint64_t seed = c.seed.value_or(0);
  const EnsembleModel ens = load_ensemble(c.model);
  const Dataset data = load_splits(c.data);
  const ManipulationSpec spec = load_spec(fs::path(c.data) / "spec.txt");
  const auto malware = select_malware(data, Split::test, subset, seed);
  const auto pool = benign_vectors(data, Split::train);
  std::vector<FeatureVector> perturbed;
  for (std::size_t n = 0; n < malware.size(); ++n) {
    Rng rng = make_rng(seed, {n});
    perturbed.push_back(run_attack(ens, AttackProblem(malware[n], kMalicious, spec), attack, {pool}, rng).x_adv);
  }
  const CorrelationStudy study = base_correlation_study(ens, perturbed);
  fs::create_directories(c.out);
  auto csv = open_out(fs::path(c.out) / "correlation.csv");
  csv << "base_i,base_j,pearson\n";
  for (const auto& p : study.pairs) csv << p.i << ',' << p.j << ',' << (p.r ? format_double(*p.r) : "") << '\n';
  std::printf("mean correlation %.3f +- %.3f over %zu pairs\n", study.mean, study.stddev, study.defined);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advens: adversarial malware detection toolkit"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Run seed");
    sub->add_option("--config", common.config, "Configuration file");
    sub->add_option("--out", common.out, "Output directory");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset and manipulation spec");
  add_common(gen);

  auto* train = app.add_subcommand("train", "Train a model (regime set in the config)");
  add_common(train);
  train->add_option("--data", common.data, "Dataset directory");

  auto* eval = app.add_subcommand("evaluate", "Detection metrics of a model on one split");
  add_common(eval);
  eval->add_option("--data", common.data, "Dataset directory");
  eval->add_option("--model", common.model, "Model file or ensemble directory");
  eval->add_option("--split", common.split, "train, validation or test");

  auto* attack = app.add_subcommand("attack", "Run an attack suite against several models");
  add_common(attack);
  attack->add_option("--data", common.data, "Dataset directory");
  attack->add_option("--suite", common.suite, "Suite file");

  auto* transfer = app.add_subcommand("transfer", "Transfer attacks from surrogate models");
  add_common(transfer);
  transfer->add_option("--data", common.data, "Dataset directory");
  transfer->add_option("--suite", common.suite, "Suite file");

  auto* theorems = app.add_subcommand("check-theorems", "Randomized checks of the ensemble error bound and spec monotonicity");
  add_common(theorems);
  theorems->add_option("--data", common.data, "Dataset directory (for the monotonicity check)");
  theorems->add_option("--model", common.model, "Model (for the monotonicity check)");

  auto* correlate = app.add_subcommand("correlate", "Pairwise correlation of ensemble bases under attack");
  add_common(correlate);
  correlate->add_option("--data", common.data, "Dataset directory");
  correlate->add_option("--model", common.model, "Ensemble directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(common);
    if (train->parsed()) return cmd_train(common);
    if (eval->parsed()) return cmd_evaluate(common);
    if (attack->parsed()) return cmd_attack(common);
    if (transfer->parsed()) return cmd_transfer(common);
    if (theorems->parsed()) return cmd_check_theorems(common);
    if (correlate->parsed()) return cmd_correlate(common);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kConfig;
}
