#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "advens/ensemble.hpp"
#include "advens/nn.hpp"

namespace advens {

// Text format, version 1:
//
//   advens-mlp 1
//   dims <d> <h1> ... 2
//   layer <l> <rows> <cols>
//   <row-major weights, one matrix row per line>
//   <bias values>
//
// Values are written in shortest round-trip form so reloading is bit-exact.
void save_mlp(const MlpModel& model, std::ostream& out);
MlpModel load_mlp(std::istream& in);
void save_mlp(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_mlp(const std::filesystem::path& path);

// An ensemble is a directory holding base_<i>.mlp files and a weights.txt record:
//
//   advens-ensemble 1
//   bases <l>
//   weights <w_1> ... <w_l>
void save_ensemble(const EnsembleModel& ensemble, const std::filesystem::path& dir);
EnsembleModel load_ensemble(const std::filesystem::path& dir);

// Loads either kind: a directory is read as an ensemble, a file as a single network.
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& token, std::size_t line = 0);

}  // namespace advens
