#include "patchclf/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "patchclf/error.hpp"

namespace patchclf {

namespace {
Metric ratio(double num, double den) {
  if (den == 0.0) return {0.0, false};
  return {num / den, true};
}
}  // namespace

Confusion confusion_at(std::span<const Prediction> predictions, double threshold) {
  Confusion c;
  for (const auto& p : predictions) {
    const bool predicted = p.probability >= threshold;
    if (p.label == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

ConfusionMetrics metrics_from(const Confusion& c) {
  ConfusionMetrics m;
  m.confusion = c;
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn);
  const auto fn = static_cast<double>(c.fn);
  m.accuracy = ratio(tp + tn, tp + fp + tn + fn);
  m.precision = ratio(tp, tp + fp);
  m.plus_recall = ratio(tp, tp + fn);
  m.minus_recall = ratio(tn, tn + fp);
  if (m.precision.defined && m.plus_recall.defined) {
    m.f1 = ratio(2.0 * m.precision.value * m.plus_recall.value, m.precision.value + m.plus_recall.value);
  } else {
    m.f1 = {0.0, false};
  }
  return m;
}

ConfusionMetrics confusion_metrics(std::span<const Prediction> predictions, double threshold) {
  return metrics_from(confusion_at(predictions, threshold));
}

double auc(std::span<const Prediction> predictions) {
  const std::size_t n = predictions.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return predictions[a].probability < predictions[b].probability; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && predictions[order[j + 1]].probability == predictions[order[i]].probability) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) {
      if (predictions[order[k]].label == 1) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw Error("eval", "AUC needs both classes");
  const auto p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

nlohmann::json to_json(const Metric& m) {
  if (m.defined) return m.value;
  return {{"value", m.value}, {"undefined", true}};
}

nlohmann::json to_json(const Confusion& c) { return {{"TP", c.tp}, {"FP", c.fp}, {"TN", c.tn}, {"FN", c.fn}}; }

nlohmann::json to_json(const ConfusionMetrics& m) {
  return {{"accuracy", to_json(m.accuracy)},       {"precision", to_json(m.precision)},
          {"plus_recall", to_json(m.plus_recall)}, {"minus_recall", to_json(m.minus_recall)},
          {"f1", to_json(m.f1)},                   {"confusion", to_json(m.confusion)}};
}

}  // namespace patchclf
