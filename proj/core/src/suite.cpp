#include "advens/suite.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "advens/error.hpp"
#include "advens/serialize.hpp"

namespace advens {
namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void verify_outcome(const Classifier& model, const FeatureVector& x, const ManipulationSpec& spec,
                    const AttackOutcome& out, const std::string& where) {
  if (!is_feasible(out.x_adv, x, spec)) throw InvariantError(where + ": attack produced an infeasible example");
  if (out.success != (predict(model, out.x_adv) != kMalicious)) {
    throw InvariantError(where + ": attack success flag disagrees with the model");
  }
}

}  // namespace

SuiteResult run_attack_suite(std::span<const NamedModel> models, std::span<const NamedAttack> attacks,
                             std::span<const FeatureVector> malware, const ManipulationSpec& spec,
                             const AttackContext& ctx, const SuiteOptions& options) {
  SuiteResult result;
  for (const auto& m : models) {
    if (m.model == nullptr) throw ConfigError("suite model '" + m.name + "' is missing");
    result.models.push_back(m.name);
  }
  for (const auto& a : attacks) {
    a.config.validate();
    result.attacks.push_back(a.name);
  }

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Classifier& model = *models[mi].model;
    for (std::size_t ai = 0; ai < attacks.size(); ++ai) {
      SuiteCell cell;
      cell.model = models[mi].name;
      cell.attack = attacks[ai].name;
      cell.examples = malware.size();
      double l0_sum = 0.0, l1_sum = 0.0;
      for (std::size_t n = 0; n < malware.size(); ++n) {
        Rng rng = make_rng(options.seed, {mi, ai, n});
        const AttackOutcome out =
            run_attack(model, AttackProblem(malware[n], kMalicious, spec), attacks[ai].config, ctx, rng);
        if (options.verify) verify_outcome(model, malware[n], spec, out, cell.model + "/" + cell.attack);
        if (!out.success) ++cell.detected;
        l0_sum += static_cast<double>(out.l0);
        l1_sum += out.l1;
        if (options.keep_examples) {
          cell.adversarial.push_back(out.x_adv);
          cell.losses.push_back(out.final_loss);
        }
      }
      if (!malware.empty()) {
        const auto n = static_cast<double>(malware.size());
        cell.accuracy = 100.0 * static_cast<double>(cell.detected) / n;
        cell.mean_l0 = l0_sum / n;
        cell.mean_l1 = l1_sum / n;
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

void write_suite_table(const SuiteResult& result, std::ostream& out) {
  std::size_t first = std::string("Attack").size();
  for (const auto& a : result.attacks) first = std::max(first, a.size());
  std::vector<std::size_t> widths;
  for (const auto& m : result.models) widths.push_back(std::max<std::size_t>(m.size(), 6));

  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto rpad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };

  out << pad("Attack", first);
  for (std::size_t m = 0; m < result.models.size(); ++m) out << "  " << rpad(result.models[m], widths[m]);
  out << '\n';
  for (std::size_t a = 0; a < result.attacks.size(); ++a) {
    out << pad(result.attacks[a], first);
    for (std::size_t m = 0; m < result.models.size(); ++m) out << "  " << rpad(fixed2(result.cell(m, a).accuracy), widths[m]);
    out << '\n';
  }
}

void write_suite_csv(const SuiteResult& result, std::ostream& out) {
  out << "model,attack,examples,detected,accuracy,mean_l0,mean_l1\n";
  for (const auto& c : result.cells) {
    out << csv_field(c.model) << ',' << csv_field(c.attack) << ',' << c.examples << ',' << c.detected << ','
        << format_double(c.accuracy) << ',' << format_double(c.mean_l0) << ',' << format_double(c.mean_l1) << '\n';
  }
}

TransferResult transfer_attack(const Classifier& target, std::span<const Classifier* const> surrogates,
                               const AttackConfig& attack, std::span<const FeatureVector> malware,
                               const ManipulationSpec& spec, const AttackContext& ctx, std::uint64_t seed,
                               bool allow_target_as_surrogate) {
  if (surrogates.empty()) throw ConfigError("transfer attack needs at least one surrogate");
  for (const auto* s : surrogates) {
    if (s == nullptr) throw ConfigError("transfer attack got a null surrogate");
    if (s == &target && !allow_target_as_surrogate) throw ConfigError("the target may not be one of its surrogates");
  }
  attack.validate();

  TransferResult result;
  result.examples = malware.size();
  for (std::size_t n = 0; n < malware.size(); ++n) {
    bool evaded = false;
    for (std::size_t s = 0; s < surrogates.size(); ++s) {
      Rng rng = make_rng(seed, {s, n});
      const AttackOutcome out = run_attack(*surrogates[s], AttackProblem(malware[n], kMalicious, spec), attack, ctx, rng);
      if (predict(target, out.x_adv) != kMalicious) evaded = true;
    }
    result.evaded_by_example.push_back(evaded);
    if (evaded) ++result.evaded;
  }
  if (!malware.empty()) {
    result.accuracy =
        100.0 * static_cast<double>(result.examples - result.evaded) / static_cast<double>(result.examples);
  }
  return result;
}

}  // namespace advens
