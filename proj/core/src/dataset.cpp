#include "advens/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "advens/error.hpp"

namespace advens {
namespace {

long parse_long(const std::string& token, std::size_t line) {
  long v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected an integer, got '" + token + "'", line);
  return v;
}

struct Component {
  Eigen::VectorXd p;
};

FeatureVector sample(const Eigen::VectorXd& p, Rng& rng) {
  FeatureVector x(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) x[j] = uniform01(rng) < p[j] ? 1.0 : 0.0;
  return x;
}

}  // namespace

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "unknown";
}

std::vector<LabeledExample> Dataset::subset(Split s) const {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (splits[i] == s) out.push_back(examples[i]);
  }
  return out;
}

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(
      std::count_if(examples.begin(), examples.end(), [label](const LabeledExample& e) { return e.y == label; }));
}

SpecProfile parse_spec_profile(std::string_view name) {
  if (name == "mixed" || name == "default") return SpecProfile::mixed;
  if (name == "add_only") return SpecProfile::add_only;
  if (name == "add_remove") return SpecProfile::add_remove;
  throw ConfigError("unknown spec profile '" + std::string(name) + "'");
}

ManipulationSpec make_spec(SpecProfile profile, std::size_t d, std::uint64_t seed) {
  switch (profile) {
    case SpecProfile::mixed:
      return default_spec(d, seed);
    case SpecProfile::add_only:
      return ManipulationSpec::uniform(d, true, false);
    case SpecProfile::add_remove:
      return ManipulationSpec::uniform(d, true, true);
  }
  throw ConfigError("unknown spec profile");
}

SyntheticData generate_synthetic(std::size_t d, std::size_t n_per_class, double separation, SpecProfile profile,
                                 std::uint64_t seed) {
  if (d < 4) throw ConfigError("synthetic data needs d >= 4");
  if (n_per_class < 10) throw ConfigError("synthetic data needs n_per_class >= 10");
  if (!(separation >= 0.0)) throw ConfigError("separation must be >= 0");

  const auto dim = static_cast<Eigen::Index>(d);
  Rng feature_rng = make_rng(seed, {1});
  Eigen::VectorXd p_ben(dim), p_mal(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double base = 0.05 + 0.25 * uniform01(feature_rng);
    const double gap = separation * (0.15 + 0.3 * uniform01(feature_rng));
    const bool malicious_lean = uniform01(feature_rng) < 0.5;
    p_ben[j] = base + (malicious_lean ? 0.0 : gap);
    p_mal[j] = base + (malicious_lean ? gap : 0.0);
  }

  // Component 0 of each class sits at the class profile. Malware component 1 also
  // also carries the benign-indicative features at the benign rate, like repackaged apps.
  std::array<std::array<Component, 2>, 2> comps;
  Rng jitter_rng = make_rng(seed, {2});
  for (int y = 0; y < 2; ++y) {
    const Eigen::VectorXd& own = y == kBenign ? p_ben : p_mal;
    const Eigen::VectorXd& other = y == kBenign ? p_mal : p_ben;
    for (std::size_t k = 0; k < 2; ++k) {
      Component& c = comps[static_cast<std::size_t>(y)][k];
      c.p = own;
      if (k == 1 && y == kMalicious) c.p += (other - own).cwiseMax(0.0);
      for (Eigen::Index j = 0; j < dim; ++j) c.p[j] = std::clamp(c.p[j] + 0.05 * (2.0 * uniform01(jitter_rng) - 1.0), 0.01, 0.99);
    }
  }

  SyntheticData out;
  out.data.d = d;
  const std::size_t n_train = n_per_class * 6 / 10;
  const std::size_t n_val = n_per_class * 2 / 10;
  for (int y = 0; y < 2; ++y) {
    Rng rng = make_rng(seed, {3, static_cast<std::uint64_t>(y)});
    for (std::size_t k = 0; k < n_per_class; ++k) {
      const auto& comp = comps[static_cast<std::size_t>(y)][uniform01(rng) < 0.7 ? 0 : 1];
      out.data.examples.push_back({sample(comp.p, rng), y});
      out.data.splits.push_back(k < n_train ? Split::train : (k < n_train + n_val ? Split::validation : Split::test));
    }
  }
  out.spec = make_spec(profile, d, seed);
  return out;
}

Dataset read_dataset(std::istream& in, Split tag) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::uint8_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (!have_header) {
      if (tokens.size() != 1 || tokens[0].rfind("d=", 0) != 0) throw ParseError("expected header 'd=<dim>'", line_no);
      const long d = parse_long(tokens[0].substr(2), line_no);
      if (d <= 0) throw ParseError("dimension must be positive", line_no);
      data.d = static_cast<std::size_t>(d);
      seen.assign(data.d, 0);
      have_header = true;
      continue;
    }
    const long label = parse_long(tokens[0], line_no);
    if (label != kBenign && label != kMalicious) throw ParseError("label must be 0 or 1", line_no);
    FeatureVector x = FeatureVector::Zero(static_cast<Eigen::Index>(data.d));
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const long idx = parse_long(tokens[t], line_no);
      if (idx < 0 || static_cast<std::size_t>(idx) >= data.d) {
        throw ParseError("feature index " + tokens[t] + " out of range for d=" + std::to_string(data.d), line_no);
      }
      if (seen[static_cast<std::size_t>(idx)]) throw ParseError("duplicate feature index " + tokens[t], line_no);
      seen[static_cast<std::size_t>(idx)] = 1;
      x[idx] = 1.0;
    }
    data.examples.push_back({std::move(x), static_cast<int>(label)});
    data.splits.push_back(tag);
  }
  if (!have_header) throw ParseError("missing 'd=<dim>' header", line_no);
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, Split tag) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return read_dataset(in, tag);
}

void write_dataset(const Dataset& data, std::ostream& out, std::optional<Split> only) {
  out << "d=" << data.d << '\n';
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    if (only && data.splits[i] != *only) continue;
    const auto& ex = data.examples[i];
    if (static_cast<std::size_t>(ex.x.size()) != data.d) throw InputError("example dimension differs from d");
    if (!is_binary(ex.x)) throw InputError("only binary vectors can be written in the sparse format");
    out << ex.y;
    for (Eigen::Index j = 0; j < ex.x.size(); ++j) {
      if (ex.x[j] == 1.0) out << ' ' << j;
    }
    out << '\n';
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, std::optional<Split> only) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_dataset(data, out, only);
}

void append_split(Dataset& into, const Dataset& part, Split tag) {
  if (into.examples.empty() && into.d == 0) into.d = part.d;
  if (into.d != part.d) throw InputError("datasets disagree on dimension");
  for (const auto& ex : part.examples) {
    into.examples.push_back(ex);
    into.splits.push_back(tag);
  }
}

std::vector<FeatureVector> select_malware(const Dataset& data, Split split, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    if (data.splits[i] == split && data.examples[i].y == kMalicious) idx.push_back(i);
  }
  if (count < idx.size()) {
    Rng rng = make_rng(seed, {0x3a1});
    for (std::size_t k = 0; k < count; ++k) std::swap(idx[k], idx[k + uniform_index(rng, idx.size() - k)]);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<FeatureVector> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data.examples[i].x);
  return out;
}

std::vector<FeatureVector> benign_vectors(const Dataset& data, Split split) {
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    if (data.splits[i] == split && data.examples[i].y == kBenign) out.push_back(data.examples[i].x);
  }
  return out;
}

}  // namespace advens
