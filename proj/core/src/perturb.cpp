#include "advens/perturb.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "advens/error.hpp"

namespace advens {
namespace {

void check_lengths(const ManipulationSpec& spec, const FeatureVector& x) {
  if (spec.can_add.size() != spec.can_remove.size()) throw InputError("malformed manipulation spec");
  if (static_cast<std::size_t>(x.size()) != spec.dim()) {
    throw InputError("vector length " + std::to_string(x.size()) + " differs from spec dimension " +
                     std::to_string(spec.dim()));
  }
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

long parse_long(const std::string& token, std::size_t line) {
  long v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected an integer, got '" + token + "'", line);
  return v;
}

}  // namespace

ManipulationSpec ManipulationSpec::uniform(std::size_t d, bool add, bool remove) {
  return {std::vector<std::uint8_t>(d, add ? 1 : 0), std::vector<std::uint8_t>(d, remove ? 1 : 0)};
}

Box bounds(const ManipulationSpec& spec, const FeatureVector& x) {
  check_lengths(spec, x);
  Box box{x, x};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (x[i] == 1.0 && spec.can_remove[u]) box.lower[i] = 0.0;
    if (x[i] == 0.0 && spec.can_add[u]) box.upper[i] = 1.0;
  }
  return box;
}

bool is_binary(const FeatureVector& x) {
  return std::all_of(x.data(), x.data() + x.size(), [](double v) { return v == 0.0 || v == 1.0; });
}

bool is_feasible(const FeatureVector& x_prime, const FeatureVector& x, const ManipulationSpec& spec) {
  check_lengths(spec, x);
  if (x_prime.size() != x.size()) throw InputError("is_feasible: vectors differ in length");
  if (!is_binary(x) || !is_binary(x_prime)) throw InputError("is_feasible expects binary vectors");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (x_prime[i] == x[i]) continue;
    if (x[i] == 0.0 && !spec.can_add[u]) return false;
    if (x[i] == 1.0 && !spec.can_remove[u]) return false;
  }
  return true;
}

ManipulationSpec union_specs(std::span<const ManipulationSpec> specs) {
  if (specs.empty()) throw InputError("union_specs needs at least one spec");
  ManipulationSpec out = specs.front();
  for (const auto& s : specs.subspan(1)) {
    if (s.dim() != out.dim()) throw InputError("union_specs: dimension mismatch");
    for (std::size_t i = 0; i < out.dim(); ++i) {
      out.can_add[i] = out.can_add[i] | s.can_add[i];
      out.can_remove[i] = out.can_remove[i] | s.can_remove[i];
    }
  }
  return out;
}

bool is_subset(const ManipulationSpec& a, const ManipulationSpec& b) {
  if (a.dim() != b.dim()) throw InputError("is_subset: dimension mismatch");
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if ((a.can_add[i] && !b.can_add[i]) || (a.can_remove[i] && !b.can_remove[i])) return false;
  }
  return true;
}

FeatureVector feasible_nearest(const FeatureVector& x_cont, const FeatureVector& x, const ManipulationSpec& spec) {
  const Box box = bounds(spec, x);
  if (x_cont.size() != x.size()) throw InputError("feasible_nearest: vectors differ in length");
  FeatureVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::clamp(x_cont[i], box.lower[i], box.upper[i]);
    out[i] = v >= 0.5 ? box.upper[i] : box.lower[i];
  }
  return out;
}

FeatureVector randomized_round(const FeatureVector& x_cont, const FeatureVector& x, const ManipulationSpec& spec,
                               Rng& rng) {
  const Box box = bounds(spec, x);
  if (x_cont.size() != x.size()) throw InputError("randomized_round: vectors differ in length");
  FeatureVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::clamp(x_cont[i], box.lower[i], box.upper[i]);
    if (box.lower[i] == box.upper[i]) {
      out[i] = box.lower[i];
    } else {
      out[i] = uniform01(rng) < v ? 1.0 : 0.0;
    }
  }
  return out;
}

std::size_t hamming_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw InputError("hamming_distance: vectors differ in length");
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) n += a[i] != b[i] ? 1 : 0;
  return n;
}

double l1_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw InputError("l1_distance: vectors differ in length");
  return (a - b).cwiseAbs().sum();
}

ManipulationSpec default_spec(std::size_t d, std::uint64_t seed) {
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0x5bec});
  shuffle(order.begin(), order.end(), rng);
  const std::size_t n_both = d / 10;
  const std::size_t n_fixed = d / 10;
  ManipulationSpec spec = ManipulationSpec::uniform(d, true, false);
  for (std::size_t k = 0; k < n_both; ++k) spec.can_remove[order[k]] = 1;
  for (std::size_t k = n_both; k < n_both + n_fixed; ++k) spec.can_add[order[k]] = 0;
  return spec;
}

ManipulationSpec read_spec(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> dim;
  ManipulationSpec spec;
  std::vector<std::uint8_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(strip_comment(line));
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (!dim) {
      if (tokens.size() != 1 || tokens[0].rfind("d=", 0) != 0) throw ParseError("expected header 'd=<dim>'", line_no);
      const long d = parse_long(tokens[0].substr(2), line_no);
      if (d <= 0) throw ParseError("dimension must be positive", line_no);
      dim = static_cast<std::size_t>(d);
      spec = ManipulationSpec::uniform(*dim, false, false);
      seen.assign(*dim, 0);
      continue;
    }
    if (tokens.size() != 3) throw ParseError("expected '<index> <can_add> <can_remove>'", line_no);
    const long idx = parse_long(tokens[0], line_no);
    const long add = parse_long(tokens[1], line_no);
    const long rem = parse_long(tokens[2], line_no);
    if (idx < 0 || static_cast<std::size_t>(idx) >= *dim) throw ParseError("feature index out of range", line_no);
    if ((add != 0 && add != 1) || (rem != 0 && rem != 1)) throw ParseError("permissions must be 0 or 1", line_no);
    const auto u = static_cast<std::size_t>(idx);
    if (seen[u]) throw ParseError("duplicate feature index " + tokens[0], line_no);
    seen[u] = 1;
    spec.can_add[u] = static_cast<std::uint8_t>(add);
    spec.can_remove[u] = static_cast<std::uint8_t>(rem);
  }
  if (!dim) throw ParseError("missing 'd=<dim>' header", line_no);
  return spec;
}

ManipulationSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return read_spec(in);
}

void write_spec(const ManipulationSpec& spec, std::ostream& out) {
  out << "d=" << spec.dim() << '\n';
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    if (spec.can_add[i] || spec.can_remove[i]) {
      out << i << ' ' << int(spec.can_add[i]) << ' ' << int(spec.can_remove[i]) << '\n';
    }
  }
}

void save_spec(const ManipulationSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_spec(spec, out);
}

}  // namespace advens
