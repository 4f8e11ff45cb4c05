#include "patchclf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "patchclf/error.hpp"
#include "patchclf/similarity.hpp"

namespace patchclf {

std::string_view to_string(ThresholdStatistic s) {
  switch (s) {
    case ThresholdStatistic::Q1: return "q1";
    case ThresholdStatistic::Mean: return "mean";
    case ThresholdStatistic::Median: return "median";
    case ThresholdStatistic::Fixed: return "fixed";
  }
  return "q1";
}

ThresholdStatistic parse_threshold_statistic(std::string_view text) {
  if (text == "q1") return ThresholdStatistic::Q1;
  if (text == "mean") return ThresholdStatistic::Mean;
  if (text == "median") return ThresholdStatistic::Median;
  if (text == "fixed") return ThresholdStatistic::Fixed;
  throw Error("filter", "unknown threshold policy '" + std::string(text) + "'", "use q1|mean|median|fixed");
}

ThresholdPolicy ThresholdPolicy::resolve(ThresholdStatistic statistic, const SimilarityStats& s, double fixed_value) {
  ThresholdPolicy p{statistic, fixed_value};
  switch (statistic) {
    case ThresholdStatistic::Q1: p.value = s.q1; break;
    case ThresholdStatistic::Mean: p.value = s.mean; break;
    case ThresholdStatistic::Median: p.value = s.median; break;
    case ThresholdStatistic::Fixed: break;
  }
  if (!std::isfinite(p.value)) throw Error("filter", "threshold is not finite");
  return p;
}

std::vector<Score> score_corpus(std::span<const EmbeddingPair> pairs) {
  if (pairs.empty()) throw Error("filter", "no embeddings to score");
  std::vector<Score> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto sim = cosine_flagged(p.buggy, p.patched);
    out.push_back({p.patch_id, sim.value, sim.degenerate});
  }
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("filter", "quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SimilarityStats stats(std::span<const double> scores) {
  if (scores.empty()) throw Error("filter", "cannot summarize an empty score set");
  std::vector<double> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end());
  SimilarityStats s;
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return s;
}

FilterResult filter_by_threshold(std::span<const LabeledScore> scores, const ThresholdPolicy& policy) {
  FilterResult r;
  r.policy = policy;
  Confusion c;
  for (const auto& s : scores) {
    if (s.label == Label::Unlabeled) throw Error("filter", "unlabeled patch " + s.patch_id + " cannot be evaluated");
    const bool keep = s.score >= policy.value;
    r.verdicts.push_back({s.patch_id, s.score, s.label, keep});
    if (s.label == Label::Correct) {
      keep ? ++c.tp : ++c.fn;
    } else {
      keep ? ++c.fp : ++c.tn;
    }
  }
  const auto m = metrics_from(c);
  r.correct_total = c.tp + c.fn;
  r.incorrect_total = c.tn + c.fp;
  r.plus_cp = c.tp;
  r.minus_ip = c.tn;
  r.plus_recall = m.plus_recall;
  r.minus_recall = m.minus_recall;
  return r;
}

Top1Result top1_per_bug(std::span<const LabeledScore> scores) {
  std::map<std::string, std::size_t> best;  // bug -> index into scores
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto [it, inserted] = best.emplace(scores[i].bug_id, i);
    if (inserted) continue;
    const auto& cur = scores[it->second];
    const auto& cand = scores[i];
    if (cand.score > cur.score || (cand.score == cur.score && cand.patch_id < cur.patch_id)) it->second = i;
  }
  Top1Result r;
  std::vector<bool> selected(scores.size(), false);
  std::size_t hits = 0;
  for (const auto& [bug, idx] : best) {
    selected[idx] = true;
    const bool correct = scores[idx].label == Label::Correct;
    hits += correct ? 1 : 0;
    r.bugs.push_back({bug, scores[idx].patch_id, scores[idx].score, correct});
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    r.verdicts.push_back({scores[i].patch_id, scores[i].score, scores[i].label, selected[i]});
  }
  r.fraction_correct = best.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(best.size());
  return r;
}

std::vector<LabeledScore> join_labels(const Corpus& corpus, std::span<const Score> scores) {
  std::unordered_map<std::string, const PatchRecord*> by_id;
  for (const auto& r : corpus.records) by_id.emplace(r.patch_id, &r);
  std::vector<LabeledScore> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    auto it = by_id.find(s.patch_id);
    if (it == by_id.end()) throw Error("filter", "no corpus record for patch_id " + s.patch_id);
    out.push_back({s.patch_id, it->second->bug_id, s.score, it->second->label});
  }
  return out;
}

nlohmann::json to_json(const SimilarityStats& s) {
  return {{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}, {"mean", s.mean}};
}

SimilarityStats stats_from_json(const nlohmann::json& j) {
  SimilarityStats s;
  s.min = j.at("min").get<double>();
  s.q1 = j.at("q1").get<double>();
  s.median = j.at("median").get<double>();
  s.q3 = j.at("q3").get<double>();
  s.max = j.at("max").get<double>();
  s.mean = j.at("mean").get<double>();
  return s;
}

nlohmann::json to_json(const ThresholdPolicy& p) { return {{"statistic", to_string(p.statistic)}, {"value", p.value}}; }

nlohmann::json to_json(const FilterResult& r) {
  return {{"policy", to_json(r.policy)},        {"correct_total", r.correct_total},
          {"incorrect_total", r.incorrect_total}, {"+CP", r.plus_cp},
          {"-IP", r.minus_ip},                    {"+Recall", to_json(r.plus_recall)},
          {"-Recall", to_json(r.minus_recall)}};
}

}  // namespace patchclf
