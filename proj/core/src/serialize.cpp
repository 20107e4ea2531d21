#include "advens/serialize.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "advens/error.hpp"

namespace advens {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line split into tokens; throws ParseError at end of input.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(std::string("unexpected end of model file, expecting ") + expecting, line_no_);
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t parse_size(const std::string& token, std::size_t line) {
  std::size_t v = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected a non-negative integer, got '" + token + "'", line);
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InvariantError("to_chars failed");
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("expected a number, got '" + token + "'", line);
  return v;
}

void save_mlp(const MlpModel& model, std::ostream& out) {
  out << "advens-mlp 1\ndims";
  for (auto d : model.layer_dims()) out << ' ' << d;
  out << '\n';
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weight;
    out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << (c ? " " : "") << format_double(w(r, c));
      out << '\n';
    }
    for (Eigen::Index r = 0; r < layers[l].bias.size(); ++r) out << (r ? " " : "") << format_double(layers[l].bias[r]);
    out << '\n';
  }
}

MlpModel load_mlp(std::istream& in) {
  LineReader reader(in);
  auto header = reader.next("header");
  if (header.size() != 2 || header[0] != "advens-mlp") throw ParseError("not an advens-mlp file", reader.line());
  if (header[1] != "1") throw ParseError("unsupported model format version " + header[1], reader.line());

  auto dims_line = reader.next("dims");
  if (dims_line.empty() || dims_line[0] != "dims") throw ParseError("expected 'dims'", reader.line());
  std::vector<std::size_t> dims;
  for (std::size_t i = 1; i < dims_line.size(); ++i) dims.push_back(parse_size(dims_line[i], reader.line()));
  if (dims.size() < 2) throw ParseError("dims needs at least two entries", reader.line());

  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    auto head = reader.next("layer header");
    if (head.size() != 4 || head[0] != "layer" || parse_size(head[1], reader.line()) != l) {
      throw ParseError("expected 'layer " + std::to_string(l) + " <rows> <cols>'", reader.line());
    }
    const auto rows = parse_size(head[2], reader.line());
    const auto cols = parse_size(head[3], reader.line());
    if (rows != dims[l + 1] || cols != dims[l]) throw ParseError("layer shape disagrees with dims", reader.line());
    Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = reader.next("weight row");
      if (row.size() != cols) throw ParseError("weight row has wrong length", reader.line());
      for (std::size_t c = 0; c < cols; ++c) {
        layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(row[c], reader.line());
      }
    }
    auto bias = reader.next("bias");
    if (bias.size() != rows) throw ParseError("bias has wrong length", reader.line());
    for (std::size_t r = 0; r < rows; ++r) layer.bias[static_cast<Eigen::Index>(r)] = parse_double(bias[r], reader.line());
    layers.push_back(std::move(layer));
  }
  try {
    return MlpModel(std::move(dims), std::move(layers));
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), reader.line());
  }
}

void save_mlp(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  save_mlp(model, out);
}

MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return load_mlp(in);
}

void save_ensemble(const EnsembleModel& ensemble, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    save_mlp(ensemble.bases()[i], dir / ("base_" + std::to_string(i) + ".mlp"));
  }
  std::ofstream out(dir / "weights.txt");
  if (!out) throw InputError("cannot write " + (dir / "weights.txt").string());
  out << "advens-ensemble 1\nbases " << ensemble.size() << "\nweights";
  for (Eigen::Index i = 0; i < ensemble.weights().size(); ++i) out << ' ' << format_double(ensemble.weights()[i]);
  out << '\n';
}

EnsembleModel load_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "weights.txt");
  if (!in) throw InputError("cannot read " + (dir / "weights.txt").string());
  LineReader reader(in);
  auto header = reader.next("header");
  if (header.size() != 2 || header[0] != "advens-ensemble" || header[1] != "1") {
    throw ParseError("not an advens-ensemble v1 weights record", reader.line());
  }
  auto count = reader.next("bases");
  if (count.size() != 2 || count[0] != "bases") throw ParseError("expected 'bases <l>'", reader.line());
  const auto l = parse_size(count[1], reader.line());
  auto weights_line = reader.next("weights");
  if (weights_line.size() != l + 1 || weights_line[0] != "weights") throw ParseError("expected l weights", reader.line());
  Eigen::VectorXd w(static_cast<Eigen::Index>(l));
  for (std::size_t i = 0; i < l; ++i) w[static_cast<Eigen::Index>(i)] = parse_double(weights_line[i + 1], reader.line());

  std::vector<MlpModel> bases;
  for (std::size_t i = 0; i < l; ++i) bases.push_back(load_mlp(dir / ("base_" + std::to_string(i) + ".mlp")));
  try {
    return EnsembleModel(std::move(bases), std::move(w));
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), reader.line());
  }
}

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return std::make_unique<EnsembleModel>(load_ensemble(path));
  return std::make_unique<MlpModel>(load_mlp(path));
}

}  // namespace advens
