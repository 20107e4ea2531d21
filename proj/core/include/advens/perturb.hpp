#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "advens/nn.hpp"
#include "advens/rng.hpp"

namespace advens {

// Per-feature manipulation permissions. A feature may flip 0->1 only if can_add is
// set and 1->0 only if can_remove is set; features are treated independently.
struct ManipulationSpec {
  std::vector<std::uint8_t> can_add;
  std::vector<std::uint8_t> can_remove;

  std::size_t dim() const { return can_add.size(); }

  static ManipulationSpec uniform(std::size_t d, bool add, bool remove);

  friend bool operator==(const ManipulationSpec&, const ManipulationSpec&) = default;
};

// Box [lower, upper] reachable from x.
struct Box {
  FeatureVector lower;
  FeatureVector upper;
};

Box bounds(const ManipulationSpec& spec, const FeatureVector& x);

bool is_binary(const FeatureVector& x);

// True iff every coordinate where x_prime differs from x flips in a permitted
// direction. Throws InputError for non-binary vectors or length mismatch.
bool is_feasible(const FeatureVector& x_prime, const FeatureVector& x, const ManipulationSpec& spec);

// Componentwise OR. Throws InputError on an empty list or dimension mismatch.
ManipulationSpec union_specs(std::span<const ManipulationSpec> specs);

// a permits nothing that b does not.
bool is_subset(const ManipulationSpec& a, const ManipulationSpec& b);

// Euclidean-nearest feasible binary point to x_cont: clip to the box, then round
// each coordinate (0.5 rounds up).
FeatureVector feasible_nearest(const FeatureVector& x_cont, const FeatureVector& x, const ManipulationSpec& spec);

// Clip to the box, then set each coordinate to 1 with probability equal to its value.
FeatureVector randomized_round(const FeatureVector& x_cont, const FeatureVector& x, const ManipulationSpec& spec,
                               Rng& rng);

std::size_t hamming_distance(const FeatureVector& a, const FeatureVector& b);
double l1_distance(const FeatureVector& a, const FeatureVector& b);

// Default synthetic profile: 80% of features add-only, 10% add+remove, 10% immutable,
// positions drawn at random.
ManipulationSpec default_spec(std::size_t d, std::uint64_t seed);

// File format: a `d=<dim>` header, then `<index> <can_add:0|1> <can_remove:0|1>` lines
// for features that are not immutable. `#` starts a comment.
ManipulationSpec read_spec(std::istream& in);
ManipulationSpec load_spec(const std::filesystem::path& path);
void write_spec(const ManipulationSpec& spec, std::ostream& out);
void save_spec(const ManipulationSpec& spec, const std::filesystem::path& path);

}  // namespace advens
