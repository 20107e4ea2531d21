#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "advens/nn.hpp"
#include "advens/perturb.hpp"

namespace advens {

enum class Split { train, validation, test };

std::string_view to_string(Split s);

struct Dataset {
  std::size_t d = 0;
  std::vector<LabeledExample> examples;
  std::vector<Split> splits;  // parallel to examples

  std::vector<LabeledExample> subset(Split s) const;
  std::size_t count(int label) const;
};

enum class SpecProfile {
  mixed,       // default_spec: 80% add-only, 10% add+remove, 10% immutable
  add_only,    // every feature may be added, none removed
  add_remove,  // every feature may flip both ways
};

SpecProfile parse_spec_profile(std::string_view name);
ManipulationSpec make_spec(SpecProfile profile, std::size_t d, std::uint64_t seed);

struct SyntheticData {
  Dataset data;
  ManipulationSpec spec;
};

// Two classes, each a mixture of two Bernoulli product distributions. Every feature
// has a base rate and leans towards one class by a gap proportional to `separation`.
// Splits are stratified 60/20/20. Throws ConfigError unless d >= 4 and n_per_class >= 10.
SyntheticData generate_synthetic(std::size_t d, std::size_t n_per_class, double separation,
                                 SpecProfile profile, std::uint64_t seed);

// Sparse text format: `d=<dim>` header, then `<label> <idx> <idx> ...` per example,
// listing the positions of 1-features. `#` starts a comment. Every loaded example is
// tagged with `tag`.
Dataset read_dataset(std::istream& in, Split tag = Split::train);
Dataset load_dataset(const std::filesystem::path& path, Split tag = Split::train);

// Writes the examples of one split (or all when `only` is empty). Throws InputError for
// non-binary vectors.
void write_dataset(const Dataset& data, std::ostream& out, std::optional<Split> only = std::nullopt);
void save_dataset(const Dataset& data, const std::filesystem::path& path, std::optional<Split> only = std::nullopt);

// Appends the examples of `part` to `into` under the given tag.
void append_split(Dataset& into, const Dataset& part, Split tag);

// Up to `count` malware examples of the test split, drawn at random without replacement
// and kept in their original order.
std::vector<FeatureVector> select_malware(const Dataset& data, Split split, std::size_t count, std::uint64_t seed);

// Feature vectors of every benign example of a split.
std::vector<FeatureVector> benign_vectors(const Dataset& data, Split split);

}  // namespace advens
