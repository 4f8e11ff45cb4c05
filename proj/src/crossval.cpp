#include "patchclf/crossval.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "patchclf/error.hpp"
#include "patchclf/parallel.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

namespace {

Metric mean_defined(const std::vector<Metric>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : values) {
    if (!m.defined) continue;
    sum += m.value;
    ++n;
  }
  if (n == 0) return {0.0, false};
  return {sum / static_cast<double>(n), true};
}

std::vector<Prediction> predictions_of(const std::vector<OofPrediction>& oof) {
  std::vector<Prediction> p;
  p.reserve(oof.size());
  for (const auto& o : oof) p.push_back({o.probability, o.label});
  return p;
}

Metric safe_auc(const std::vector<Prediction>& p) {
  bool pos = false, neg = false;
  for (const auto& x : p) (x.label == 1 ? pos : neg) = true;
  if (!pos || !neg) return {0.0, false};
  return {auc(p), true};
}

}  // namespace

CrossvalReport crossval(const std::vector<std::string>& patch_ids, const std::vector<std::string>& bug_ids,
                        const Eigen::VectorXi& labels, std::size_t k, std::uint64_t seed, const FoldRunner& runner,
                        unsigned workers) {
  const auto n = static_cast<Eigen::Index>(patch_ids.size());
  if (static_cast<Eigen::Index>(bug_ids.size()) != n || labels.size() != n) {
    throw Error("eval", "patch ids, bug ids and labels differ in length");
  }
  const FoldPlan plan = split_by_bug(std::span<const std::string>(bug_ids), k, seed);
  std::unordered_map<std::string, int> group;
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    for (const auto& b : plan.groups[g]) group[b] = static_cast<int>(g);
  }

  CrossvalReport report;
  report.k = k;
  report.seed = seed;
  report.folds.resize(k);
  report.oof.resize(patch_ids.size());
  std::vector<std::vector<Eigen::Index>> tests(k);
  for (Eigen::Index i = 0; i < n; ++i) tests[static_cast<std::size_t>(group.at(bug_ids[static_cast<std::size_t>(i)]))].push_back(i);

  for (std::size_t f = 0; f < k; ++f) {
    Eigen::Index positives = 0, count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (group.at(bug_ids[static_cast<std::size_t>(i)]) == static_cast<int>(f)) continue;
      positives += labels(i) == 1;
      ++count;
    }
    if (positives == 0 || positives == count) {
      throw Error("eval", "training split of fold " + std::to_string(f) + " contains a single class",
                  "use another --seed or a smaller --k");
    }
  }

  parallel_for(k, workers, [&](std::size_t f) {
    const auto& test = tests[f];
    std::vector<Eigen::Index> train;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (group.at(bug_ids[static_cast<std::size_t>(i)]) != static_cast<int>(f)) train.push_back(i);
    }
    const Eigen::VectorXd probs = runner(train, test, mix_seed(seed, f));
    if (probs.size() != static_cast<Eigen::Index>(test.size())) throw Error("eval", "fold runner returned wrong size");
    std::vector<Prediction> preds;
    for (std::size_t t = 0; t < test.size(); ++t) {
      const auto i = static_cast<std::size_t>(test[t]);
      report.oof[i] = {patch_ids[i], bug_ids[i], labels(test[t]), probs(static_cast<Eigen::Index>(t)), static_cast<int>(f)};
      preds.push_back({probs(static_cast<Eigen::Index>(t)), labels(test[t])});
    }
    auto& fr = report.folds[f];
    fr.fold = static_cast<int>(f);
    fr.train_size = train.size();
    fr.test_size = test.size();
    fr.metrics = confusion_metrics(preds);
    fr.auc = safe_auc(preds);
  });

  auto collect = [&](auto member) {
    std::vector<Metric> v;
    for (const auto& f : report.folds) v.push_back(member(f));
    return mean_defined(v);
  };
  report.macro.accuracy = collect([](const FoldReport& f) { return f.metrics.accuracy; });
  report.macro.precision = collect([](const FoldReport& f) { return f.metrics.precision; });
  report.macro.plus_recall = collect([](const FoldReport& f) { return f.metrics.plus_recall; });
  report.macro.minus_recall = collect([](const FoldReport& f) { return f.metrics.minus_recall; });
  report.macro.f1 = collect([](const FoldReport& f) { return f.metrics.f1; });
  report.macro.auc = collect([](const FoldReport& f) { return f.auc; });
  for (const auto& f : report.folds) report.macro.confusion += f.metrics.confusion;

  const auto pooled = predictions_of(report.oof);
  const auto m = confusion_metrics(pooled);
  report.micro = {m.accuracy, m.precision, m.plus_recall, m.minus_recall, m.f1, safe_auc(pooled), m.confusion};
  return report;
}

CrossvalReport crossval(const FeatureMatrix& data, ModelKind kind, const LearnerConfig& config, std::size_t k,
                        std::uint64_t seed, unsigned workers) {
  data.validate();
  return crossval(
      data.patch_ids, data.bug_ids, data.y, k, seed,
      [&](const std::vector<Eigen::Index>& train_rows, const std::vector<Eigen::Index>& test_rows, std::uint64_t s) {
        const auto tr = data.select_rows(train_rows);
        const auto model = train(kind, tr.X, tr.y, config, s);
        return model.predict_batch(data.select_rows(test_rows).X);
      },
      workers);
}

CrossvalReport crossval(const FeatureMatrix& learned, const FeatureMatrix& engineered, Strategy strategy,
                        ModelKind kind, const LearnerConfig& config, const FusionConfig& fusion, std::size_t k,
                        std::uint64_t seed, unsigned workers) {
  learned.validate();
  engineered.validate();
  if (learned.patch_ids != engineered.patch_ids) throw Error("eval", "feature sets are not row-aligned");
  return crossval(
      learned.patch_ids, learned.bug_ids, learned.y, k, seed,
      [&](const std::vector<Eigen::Index>& train_rows, const std::vector<Eigen::Index>& test_rows, std::uint64_t s) {
        const auto model = train_combined(strategy, kind, learned.select_rows(train_rows),
                                          engineered.select_rows(train_rows), config, fusion, s);
        return model.predict_batch(learned.select_rows(test_rows).X, engineered.select_rows(test_rows).X);
      },
      workers);
}

nlohmann::json to_json(const MetricsSummary& s) {
  return {{"accuracy", to_json(s.accuracy)},       {"precision", to_json(s.precision)},
          {"plus_recall", to_json(s.plus_recall)}, {"minus_recall", to_json(s.minus_recall)},
          {"f1", to_json(s.f1)},                   {"auc", to_json(s.auc)},
          {"confusion", to_json(s.confusion)}};
}

nlohmann::json to_json(const CrossvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    auto j = to_json(f.metrics);
    j["fold"] = f.fold;
    j["train_size"] = f.train_size;
    j["test_size"] = f.test_size;
    j["auc"] = to_json(f.auc);
    folds.push_back(j);
  }
  return {{"k", r.k},
          {"seed", r.seed},
          {"averaging", "macro"},
          {"threshold", 0.5},
          {"metrics", to_json(r.macro)},
          {"micro", to_json(r.micro)},
          {"per_fold", folds}};
}

std::string oof_to_csv(const std::vector<OofPrediction>& oof, const nlohmann::json& provenance) {
  std::ostringstream out;
  if (!provenance.is_null()) out << "# " << provenance.dump() << '\n';
  out << "patch_id,bug_id,label,probability,fold\n";
  for (const auto& o : oof) {
    out << o.patch_id << ',' << o.bug_id << ',' << o.label << ',' << format_double(o.probability) << ',' << o.fold
        << '\n';
  }
  return out.str();
}

void write_oof_csv(const std::vector<OofPrediction>& oof, const std::filesystem::path& path,
                   const nlohmann::json& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("eval", "cannot write " + path.string());
  out << oof_to_csv(oof, provenance);
}

std::vector<OofPrediction> parse_oof_csv(std::string_view text) {
  std::vector<OofPrediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "patch_id,bug_id,label,probability,fold") {
        throw Error("eval", "prediction CSV header must be patch_id,bug_id,label,probability,fold");
      }
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 5) throw Error("eval", "line " + std::to_string(number) + ": expected 5 columns");
    OofPrediction o;
    o.patch_id = cells[0];
    o.bug_id = cells[1];
    try {
      o.label = std::stoi(cells[2]);
      o.probability = std::stod(cells[3]);
      o.fold = std::stoi(cells[4]);
    } catch (const std::exception&) {
      throw Error("eval", "line " + std::to_string(number) + ": malformed number");
    }
    out.push_back(std::move(o));
  }
  if (!header) throw Error("eval", "prediction CSV has no header");
  return out;
}

std::vector<OofPrediction> read_oof_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("eval", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_oof_csv(ss.str());
}

Comparison compare(const std::vector<OofPrediction>& a, const std::vector<OofPrediction>& b) {
  std::map<std::string, const OofPrediction*> index;
  for (const auto& o : b) index[o.patch_id] = &o;
  Comparison c;
  for (const auto& x : a) {
    const auto it = index.find(x.patch_id);
    if (it == index.end()) {
      ++c.unmatched;
      continue;
    }
    const auto& y = *it->second;
    if (x.label != y.label) throw Error("eval", "patch " + x.patch_id + " has different labels in the two files");
    ++c.matched;
    const bool hit_a = (x.probability >= 0.5) == (x.label == 1);
    const bool hit_b = (y.probability >= 0.5) == (y.label == 1);
    auto& counts = x.label == 1 ? c.correct_patches : c.incorrect_patches;
    if (hit_a && hit_b) ++counts.both;
    else if (hit_a) ++counts.only_a;
    else if (hit_b) ++counts.only_b;
    else ++counts.neither;
  }
  c.unmatched += b.size() - c.matched;
  return c;
}

nlohmann::json to_json(const Comparison& c) {
  auto o = [](const OverlapCounts& x) {
    return nlohmann::json{{"both", x.both}, {"only_a", x.only_a}, {"only_b", x.only_b}, {"neither", x.neither}};
  };
  return {{"correct_patches_identified", o(c.correct_patches)},
          {"incorrect_patches_filtered", o(c.incorrect_patches)},
          {"matched", c.matched},
          {"unmatched", c.unmatched}};
}

}  // namespace patchclf
