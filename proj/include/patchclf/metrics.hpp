#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace patchclf {

/// Label 1 = correct patch (positive class), 0 = incorrect.
struct Prediction {
  double probability = 0.0;
  int label = 0;
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

/// A metric whose denominator was zero is reported as 0 and flagged
/// undefined.
struct Metric {
  double value = 0.0;
  bool defined = true;
};

struct ConfusionMetrics {
  Confusion confusion;
  Metric accuracy;
  Metric precision;
  Metric plus_recall;   // TP / (TP + FN)
  Metric minus_recall;  // TN / (TN + FP)
  Metric f1;
};

Confusion confusion_at(std::span<const Prediction> predictions, double threshold = 0.5);
ConfusionMetrics metrics_from(const Confusion& c);
ConfusionMetrics confusion_metrics(std::span<const Prediction> predictions, double threshold = 0.5);

/// Rank-based (Mann-Whitney) AUC; tied scores share the average rank, so a
/// tied positive/negative pair counts 1/2. Throws when a class is missing.
double auc(std::span<const Prediction> predictions);

nlohmann::json to_json(const Metric& m);
nlohmann::json to_json(const Confusion& c);
nlohmann::json to_json(const ConfusionMetrics& m);

}  // namespace patchclf
