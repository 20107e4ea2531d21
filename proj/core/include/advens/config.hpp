#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "advens/attacks.hpp"
#include "advens/dataset.hpp"
#include "advens/suite.hpp"
#include "advens/training.hpp"

namespace advens {

// Key-value configuration text:
//
//   # comment
//   key = value
//   [kind name]
//   key = value
//
// Keys before the first section belong to the root section.
struct IniEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct IniSection {
  std::string kind;
  std::string name;
  std::size_t line = 0;
  std::vector<IniEntry> entries;

  const IniEntry* find(const std::string& key) const;
};

struct IniDocument {
  IniSection root;
  std::vector<IniSection> sections;
};

// Throws ConfigError (with the line number) on malformed lines or repeated keys.
IniDocument parse_ini(std::istream& in);
IniDocument load_ini(const std::filesystem::path& path);

// Starts from the preset of the section's `method` (attack-time, or training budgets when
// `preset = training` or training_budget is set) and applies the remaining keys.
AttackConfig attack_from_section(const IniSection& section, bool training_budget);

struct TrainingFile {
  TrainingConfig config;
  std::vector<std::filesystem::path> spec_paths;  // relative paths resolved against the file
};

TrainingFile training_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir = {});

struct SuiteFile {
  std::size_t subset = 800;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::filesystem::path>> models;
  std::vector<NamedAttack> attacks;
  std::vector<std::filesystem::path> spec_paths;
  std::string target;                   // transfer only
  std::vector<std::string> surrogates;  // transfer only; empty means every other model
  std::string correlation_attack = "max";
};

SuiteFile suite_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir = {});

struct SyntheticConfig {
  std::size_t d = 100;
  std::size_t n_per_class = 1000;
  double separation = 1.0;
  SpecProfile profile = SpecProfile::mixed;
};

SyntheticConfig synthetic_from_ini(const IniDocument& doc);

}  // namespace advens
