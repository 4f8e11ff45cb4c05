#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/combine.hpp"
#include "patchclf/corpus.hpp"
#include "patchclf/features.hpp"
#include "patchclf/metrics.hpp"
#include "patchclf/model.hpp"

namespace patchclf {

struct OofPrediction {
  std::string patch_id;
  std::string bug_id;
  int label = 0;
  double probability = 0.0;
  int fold = 0;
};

struct FoldReport {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  ConfusionMetrics metrics;
  Metric auc;  // undefined when the test split holds a single class
};

struct MetricsSummary {
  Metric accuracy;
  Metric precision;
  Metric plus_recall;
  Metric minus_recall;
  Metric f1;
  Metric auc;
  Confusion confusion;  // pooled over folds
};

struct CrossvalReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldReport> folds;
  MetricsSummary macro;  // mean of defined per-fold values
  MetricsSummary micro;  // pooled out-of-fold predictions
  std::vector<OofPrediction> oof;  // corpus row order
};

/// Fits on `train` rows and returns probabilities for `test` rows.
using FoldRunner = std::function<Eigen::VectorXd(const std::vector<Eigen::Index>& train,
                                                 const std::vector<Eigen::Index>& test, std::uint64_t fold_seed)>;

/// Bug-disjoint k-group cross-validation. Every row is predicted exactly
/// once. Fold seeds are derived from `seed`, so results do not depend on
/// `workers`.
CrossvalReport crossval(const std::vector<std::string>& patch_ids, const std::vector<std::string>& bug_ids,
                        const Eigen::VectorXi& labels, std::size_t k, std::uint64_t seed, const FoldRunner& runner,
                        unsigned workers = 1);

CrossvalReport crossval(const FeatureMatrix& data, ModelKind kind, const LearnerConfig& config, std::size_t k,
                        std::uint64_t seed, unsigned workers = 1);

/// `learned` and `engineered` must be row-aligned (see naive_concat).
CrossvalReport crossval(const FeatureMatrix& learned, const FeatureMatrix& engineered, Strategy strategy,
                        ModelKind kind, const LearnerConfig& config, const FusionConfig& fusion, std::size_t k,
                        std::uint64_t seed, unsigned workers = 1);

nlohmann::json to_json(const MetricsSummary& s);
nlohmann::json to_json(const CrossvalReport& r);

std::string oof_to_csv(const std::vector<OofPrediction>& oof, const nlohmann::json& provenance = nullptr);
void write_oof_csv(const std::vector<OofPrediction>& oof, const std::filesystem::path& path,
                   const nlohmann::json& provenance = nullptr);
std::vector<OofPrediction> parse_oof_csv(std::string_view text);
std::vector<OofPrediction> read_oof_csv(const std::filesystem::path& path);

/// Overlap of the patches each run classifies correctly at threshold 0.5,
/// split by true label.
struct OverlapCounts {
  std::size_t both = 0;
  std::size_t only_a = 0;
  std::size_t only_b = 0;
  std::size_t neither = 0;
};

struct Comparison {
  OverlapCounts correct_patches;    // identified as correct
  OverlapCounts incorrect_patches;  // filtered as incorrect
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

Comparison compare(const std::vector<OofPrediction>& a, const std::vector<OofPrediction>& b);
nlohmann::json to_json(const Comparison& c);

}  // namespace patchclf
