#pragma once

#include <cstddef>
#include <span>

#include "advens/nn.hpp"

namespace advens {

// Detection metrics in percent. Malware (label 1) is the positive class. A ratio whose
// denominator is zero is reported as 0 and its flag is raised.
struct MetricsReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double fnr = 0.0, fpr = 0.0, acc = 0.0, bacc = 0.0, f1 = 0.0;
  bool fnr_undefined = false;
  bool fpr_undefined = false;
  bool bacc_undefined = false;
  bool f1_undefined = false;
};

// Throws InputError when all counts are zero.
MetricsReport metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);

// Throws InputError on an empty split.
MetricsReport evaluate(const Classifier& model, std::span<const LabeledExample> split);

}  // namespace advens
