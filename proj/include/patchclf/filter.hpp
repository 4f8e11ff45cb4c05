#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "patchclf/corpus.hpp"
#include "patchclf/embedding.hpp"
#include "patchclf/metrics.hpp"

namespace patchclf {

struct SimilarityStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

enum class ThresholdStatistic { Q1, Mean, Median, Fixed };

std::string_view to_string(ThresholdStatistic s);
ThresholdStatistic parse_threshold_statistic(std::string_view text);

struct ThresholdPolicy {
  ThresholdStatistic statistic = ThresholdStatistic::Q1;
  double value = 0.0;

  /// Resolves a Q1/Mean/Median policy from `stats`; Fixed uses `fixed_value`.
  static ThresholdPolicy resolve(ThresholdStatistic statistic, const SimilarityStats& stats, double fixed_value = 0.0);
};

struct Score {
  std::string patch_id;
  double score = 0.0;
  bool degenerate = false;  // zero-norm vector
};

std::vector<Score> score_corpus(std::span<const EmbeddingPair> pairs);

/// Linear interpolation between closest ranks: position (N - 1) * p.
double quantile(std::vector<double> values, double p);
SimilarityStats stats(std::span<const double> scores);

struct LabeledScore {
  std::string patch_id;
  std::string bug_id;
  double score = 0.0;
  Label label = Label::Incorrect;
};

struct Verdict {
  std::string patch_id;
  double score = 0.0;
  Label label = Label::Incorrect;
  bool predicted_correct = false;
};

struct FilterResult {
  ThresholdPolicy policy;
  std::vector<Verdict> verdicts;
  std::size_t correct_total = 0;
  std::size_t incorrect_total = 0;
  std::size_t plus_cp = 0;   // correct patches at or above the threshold
  std::size_t minus_ip = 0;  // incorrect patches below the threshold
  Metric plus_recall;
  Metric minus_recall;
};

/// Retains a patch iff score >= policy.value (inclusive boundary).
FilterResult filter_by_threshold(std::span<const LabeledScore> scores, const ThresholdPolicy& policy);

struct BugSelection {
  std::string bug_id;
  std::string selected_patch;
  double score = 0.0;
  bool selected_is_correct = false;
};

struct Top1Result {
  std::vector<BugSelection> bugs;  // sorted by bug_id
  std::vector<Verdict> verdicts;   // input order
  double fraction_correct = 0.0;
};

/// Highest score per bug is predicted correct; ties go to the
/// lexicographically smallest patch_id.
Top1Result top1_per_bug(std::span<const LabeledScore> scores);

/// Joins corpus labels/bugs onto scores by patch_id; unknown ids throw.
std::vector<LabeledScore> join_labels(const Corpus& corpus, std::span<const Score> scores);

nlohmann::json to_json(const SimilarityStats& s);
SimilarityStats stats_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ThresholdPolicy& p);
nlohmann::json to_json(const FilterResult& r);

}  // namespace patchclf
