#include "advens/metrics.hpp"

#include "advens/error.hpp"

namespace advens {

MetricsReport metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  const std::size_t total = tp + tn + fp + fn;
  if (total == 0) throw InputError("metrics of an empty split are undefined");
  MetricsReport r;
  r.tp = tp;
  r.tn = tn;
  r.fp = fp;
  r.fn = fn;
  auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };

  r.fnr = 100.0 * ratio(fn, tp + fn, r.fnr_undefined);
  r.fpr = 100.0 * ratio(fp, tn + fp, r.fpr_undefined);
  r.acc = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total);

  r.bacc_undefined = r.fnr_undefined || r.fpr_undefined;
  if (!r.bacc_undefined) {
    const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
    r.bacc = 100.0 * 0.5 * (tpr + tnr);
  }

  bool precision_undefined = false, recall_undefined = false;
  const double precision = ratio(tp, tp + fp, precision_undefined);
  const double recall = ratio(tp, tp + fn, recall_undefined);
  r.f1_undefined = precision_undefined || recall_undefined || precision + recall == 0.0;
  if (!r.f1_undefined) r.f1 = 100.0 * 2.0 * precision * recall / (precision + recall);
  return r;
}

MetricsReport evaluate(const Classifier& model, std::span<const LabeledExample> split) {
  if (split.empty()) throw InputError("cannot evaluate on an empty split");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& ex : split) {
    const bool flagged = predict(model, ex.x) == kMalicious;
    if (ex.y == kMalicious) {
      (flagged ? tp : fn) += 1;
    } else {
      (flagged ? fp : tn) += 1;
    }
  }
  return metrics_from_counts(tp, tn, fp, fn);
}

}  // namespace advens
