#include "advens/config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "advens/error.hpp"

namespace advens {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const IniEntry& e, const std::string& what) {
  throw ConfigError("line " + std::to_string(e.line) + ": " + e.key + ": " + what);
}

long long to_integer(const IniEntry& e) {
  long long v = 0;
  const auto* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(e, "expected an integer, got '" + e.value + "'");
  return v;
}

int to_int(const IniEntry& e) {
  const auto v = to_integer(e);
  if (v < -2147483647LL || v > 2147483647LL) bad(e, "integer out of range");
  return static_cast<int>(v);
}

std::size_t to_size(const IniEntry& e) {
  const auto v = to_integer(e);
  if (v < 0) bad(e, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const IniEntry& e) {
  std::uint64_t v = 0;
  const auto* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(e, "expected an unsigned integer, got '" + e.value + "'");
  return v;
}

double to_real(const IniEntry& e) {
  double v = 0.0;
  const auto* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(e, "expected a number, got '" + e.value + "'");
  return v;
}

bool to_bool(const IniEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  bad(e, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void reject_unknown(const IniSection& s, const std::set<std::string>& known) {
  for (const auto& e : s.entries) {
    if (!known.count(e.key)) bad(e, "unknown key");
  }
}

AttackMethod method_of(const IniSection& section) {
  if (const auto* m = section.find("method")) {
    try {
      return parse_attack_method(m->value);
    } catch (const ConfigError& err) {
      bad(*m, err.what());
    }
  }
  try {
    return parse_attack_method(section.name);
  } catch (const ConfigError&) {
    throw ConfigError("line " + std::to_string(section.line) + ": section '" + section.name + "' needs a method key");
  }
}

}  // namespace

const IniEntry* IniSection::find(const std::string& key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

IniDocument parse_ini(std::istream& in) {
  IniDocument doc;
  IniSection* current = &doc.root;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      const auto space = inner.find_first_of(" \t");
      IniSection s;
      s.kind = inner.substr(0, space);
      s.name = space == std::string::npos ? std::string() : trim(inner.substr(space));
      s.line = line_no;
      if (s.kind.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section header");
      doc.sections.push_back(std::move(s));
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    IniEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (current->find(e.key)) throw ConfigError("line " + std::to_string(line_no) + ": repeated key '" + e.key + "'");
    current->entries.push_back(std::move(e));
  }
  return doc;
}

IniDocument load_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_ini(in);
}

AttackConfig attack_from_section(const IniSection& section, bool training_budget) {
  reject_unknown(section, {"method", "preset", "iterations", "step_size", "random_start", "lambda", "bandwidth",
                           "n_ben", "n_rept", "eps_max", "n_s", "max_flips", "components", "rounds", "epsilon",
                           "seed"});
  const AttackMethod method = method_of(section);
  bool training = training_budget;
  if (const auto* p = section.find("preset")) {
    if (p->value == "training") {
      training = true;
    } else if (p->value == "attack") {
      training = false;
    } else {
      bad(*p, "expected 'attack' or 'training'");
    }
  }
  AttackConfig c = training ? training_preset(method) : attack_preset(method);
  for (const auto& e : section.entries) {
    if (e.key == "iterations") c.iterations = to_int(e);
    else if (e.key == "step_size") c.step_size = to_real(e);
    else if (e.key == "random_start") c.random_start = to_bool(e);
    else if (e.key == "lambda") c.lambda = to_real(e);
    else if (e.key == "bandwidth") c.bandwidth = to_real(e);
    else if (e.key == "n_ben") c.n_ben = to_int(e);
    else if (e.key == "n_rept") c.n_rept = to_int(e);
    else if (e.key == "eps_max") c.eps_max = to_real(e);
    else if (e.key == "n_s") c.n_s = to_int(e);
    else if (e.key == "max_flips") c.max_flips = to_int(e);
    else if (e.key == "rounds") c.rounds = to_int(e);
    else if (e.key == "epsilon") c.epsilon = to_real(e);
    else if (e.key == "seed") c.seed = to_u64(e);
    else if (e.key == "components") {
      c.components.clear();
      for (const auto& name : to_list(e.value)) {
        try {
          const auto m = parse_attack_method(name);
          c.components.push_back(training ? training_preset(m) : attack_preset(m));
        } catch (const ConfigError& err) {
          bad(e, err.what());
        }
      }
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& err) {
    throw ConfigError("line " + std::to_string(section.line) + ": [" + section.kind + " " + section.name + "]: " +
                      err.what());
  }
  return c;
}

TrainingFile training_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir) {
  TrainingFile out;
  TrainingConfig& c = out.config;
  c.inner_maximizers.clear();
  std::vector<std::string> names;
  reject_unknown(doc.root, {"regime", "hidden", "epochs", "batch_size", "learning_rate", "maximizers", "gamma",
                            "ensemble_size", "shared_base_init", "weight_steps", "weight_beta", "weight_batch",
                            "clean_weight", "select_best", "seed", "specs"});
  for (const auto& e : doc.root.entries) {
    if (e.key == "regime") {
      try {
        c.regime = parse_regime(e.value);
      } catch (const ConfigError& err) {
        bad(e, err.what());
      }
    } else if (e.key == "hidden") {
      c.hidden.clear();
      for (const auto& item : to_list(e.value)) c.hidden.push_back(to_size(IniEntry{e.key, item, e.line}));
    } else if (e.key == "epochs") c.epochs = to_int(e);
    else if (e.key == "batch_size") c.batch_size = to_size(e);
    else if (e.key == "learning_rate") c.learning_rate = to_real(e);
    else if (e.key == "gamma") c.gamma = to_real(e);
    else if (e.key == "ensemble_size") c.ensemble_size = to_size(e);
    else if (e.key == "shared_base_init") c.shared_base_init = to_bool(e);
    else if (e.key == "weight_steps") c.weight_steps = to_int(e);
    else if (e.key == "weight_beta") c.weight_beta = to_real(e);
    else if (e.key == "weight_batch") c.weight_batch = to_size(e);
    else if (e.key == "clean_weight") c.clean_weight = to_real(e);
    else if (e.key == "select_best") c.select_best = to_bool(e);
    else if (e.key == "seed") c.seed = to_u64(e);
    else if (e.key == "maximizers") names = to_list(e.value);
    else if (e.key == "specs") {
      for (const auto& p : to_list(e.value)) out.spec_paths.push_back(resolve(base_dir, p));
    }
  }

  // listed maximizers take training presets; [maximizer NAME] sections override or append
  std::vector<bool> overridden(names.size(), false);
  for (const auto& name : names) {
    try {
      c.inner_maximizers.push_back(training_preset(parse_attack_method(name)));
    } catch (const ConfigError& err) {
      throw ConfigError("maximizers: " + std::string(err.what()));
    }
  }
  for (const auto& s : doc.sections) {
    if (s.kind != "maximizer") throw ConfigError("line " + std::to_string(s.line) + ": unexpected section [" + s.kind + "]");
    const AttackConfig cfg = attack_from_section(s, true);
    bool placed = false;
    for (std::size_t i = 0; i < names.size() && !placed; ++i) {
      if (!overridden[i] && names[i] == s.name) {
        c.inner_maximizers[i] = cfg;
        overridden[i] = true;
        placed = true;
      }
    }
    if (!placed) c.inner_maximizers.push_back(cfg);
  }
  return out;
}

SuiteFile suite_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir) {
  SuiteFile out;
  reject_unknown(doc.root, {"subset", "seed", "specs", "target", "surrogates", "correlation_attack"});
  for (const auto& e : doc.root.entries) {
    if (e.key == "subset") out.subset = to_size(e);
    else if (e.key == "seed") out.seed = to_u64(e);
    else if (e.key == "target") out.target = e.value;
    else if (e.key == "surrogates") out.surrogates = to_list(e.value);
    else if (e.key == "correlation_attack") out.correlation_attack = e.value;
    else if (e.key == "specs") {
      for (const auto& p : to_list(e.value)) out.spec_paths.push_back(resolve(base_dir, p));
    }
  }
  for (const auto& s : doc.sections) {
    if (s.name.empty()) throw ConfigError("line " + std::to_string(s.line) + ": section needs a name");
    if (s.kind == "model") {
      reject_unknown(s, {"path"});
      const auto* p = s.find("path");
      if (!p) throw ConfigError("line " + std::to_string(s.line) + ": [model " + s.name + "] needs a path");
      out.models.emplace_back(s.name, resolve(base_dir, p->value));
    } else if (s.kind == "attack") {
      out.attacks.push_back({s.name, attack_from_section(s, false)});
    } else {
      throw ConfigError("line " + std::to_string(s.line) + ": unexpected section [" + s.kind + "]");
    }
  }
  return out;
}

SyntheticConfig synthetic_from_ini(const IniDocument& doc) {
  SyntheticConfig c;
  reject_unknown(doc.root, {"d", "n_per_class", "separation", "profile"});
  for (const auto& e : doc.root.entries) {
    if (e.key == "d") c.d = to_size(e);
    else if (e.key == "n_per_class") c.n_per_class = to_size(e);
    else if (e.key == "separation") c.separation = to_real(e);
    else if (e.key == "profile") {
      try {
        c.profile = parse_spec_profile(e.value);
      } catch (const ConfigError& err) {
        bad(e, err.what());
      }
    }
  }
  if (!doc.sections.empty()) throw ConfigError("gen-data configs take no sections");
  return c;
}

}  // namespace advens
