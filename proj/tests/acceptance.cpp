// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "patchclf/combine.hpp"
#include "patchclf/crossing.hpp"
#include "patchclf/crossval.hpp"
#include "patchclf/filter.hpp"
#include "patchclf/pipeline.hpp"
#include "patchclf/synthetic.hpp"

using namespace patchclf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double oof_auc(const CrossvalReport& r) {
  std::vector<Prediction> p;
  for (const auto& o : r.oof) p.push_back({o.probability, o.label});
  return auc(p);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

Eigen::MatrixXd uniform_rows(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, -1, 1);
  return m;
}

Outcome crossing_dimension() {
  Rng rng(1);
  for (Eigen::Index n : {1, 2, 64, 1024}) {
    const Eigen::VectorXd b = Eigen::VectorXd::Random(n), p = Eigen::VectorXd::Random(n);
    const auto x = cross(b, p);
    if (x.size() != 2 * n + 2) return {false, "n=" + std::to_string(n) + " gave " + std::to_string(x.size())};
    if (static_cast<Eigen::Index>(crossed_feature_names(n).size()) != 2 * n + 2) return {false, "name count"};
  }
  return {true, "2n+2 for n in {1,2,64,1024}"};
}

Outcome recall_arithmetic() {
  const auto plus = metrics_from(Confusion{4, 0, 0, 3}).plus_recall.value * 100.0;
  const auto minus = metrics_from(Confusion{0, 74, 1387, 0}).minus_recall.value * 100.0;
  const bool ok = std::abs(plus - 57.1) <= 0.05 && std::abs(minus - 94.9) <= 0.05;
  return {ok, "+Recall " + fmt(plus) + ", -Recall " + fmt(minus)};
}

Outcome quartile_threshold() {
  Rng rng(3);
  double worst = 1.0;
  int below = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 500);
    std::vector<double> v(n);
    const int levels = t % 3 == 0 ? 4 : 0;
    for (auto& x : v) x = levels ? static_cast<double>(uniform_index(rng, levels)) / levels : uniform(rng, -1, 1);
    std::vector<LabeledScore> scores;
    for (std::size_t i = 0; i < n; ++i) scores.push_back({std::to_string(i), "b", v[i], Label::Correct});
    const auto r = filter_by_threshold(scores, ThresholdPolicy::resolve(ThresholdStatistic::Q1, stats(v)));
    const double kept = static_cast<double>(r.plus_cp) / static_cast<double>(n);
    below += kept < 0.75;
    worst = std::min(worst, kept);
  }
  return {below == 0, std::to_string(below) + " of 100 sets below 75%, lowest retained fraction " + fmt(worst)};
}

Outcome auc_oracle() {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    const int levels = t % 2 == 0 ? 1 + static_cast<int>(uniform_index(rng, 4)) : 0;
    std::vector<Prediction> p(n);
    for (auto& x : p) {
      x.probability = levels ? static_cast<double>(uniform_index(rng, levels)) / levels : uniform01(rng);
      x.label = static_cast<int>(uniform_index(rng, 2));
    }
    p[0].label = 1;
    p[1].label = 0;
    worst = std::max(worst, std::abs(auc(p) - oracle::pairwise_auc(p)));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation %.2e over 500 instances", worst);
  return {worst <= 1e-9, buf};
}

Outcome fold_hygiene() {
  std::size_t leaks = 0, folds = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    SyntheticConfig cfg;
    cfg.bugs = 20 + static_cast<int>(s % 7);
    cfg.patches_per_bug = 3 + static_cast<int>(s % 4);
    cfg.mode = SignalMode::None;
    cfg.seed = s + 100;
    cfg.dim = 4;
    const auto synth = generate_synthetic(cfg);
    std::vector<std::string> ids, bugs;
    Eigen::VectorXi y(static_cast<Eigen::Index>(synth.corpus.size()));
    for (std::size_t i = 0; i < synth.corpus.size(); ++i) {
      ids.push_back(synth.corpus.records[i].patch_id);
      bugs.push_back(synth.corpus.records[i].bug_id);
      y(static_cast<Eigen::Index>(i)) = label_value(synth.corpus.records[i].label);
    }
    auto runner = [&](const std::vector<Eigen::Index>& train, const std::vector<Eigen::Index>& test, std::uint64_t) {
      std::set<std::string> seen;
      for (auto i : train) seen.insert(bugs[static_cast<std::size_t>(i)]);
      for (auto i : test) leaks += seen.count(bugs[static_cast<std::size_t>(i)]);
      ++folds;
      return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(test.size()), 0.5).eval();
    };
    crossval(ids, bugs, y, 5 + s % 6, s, runner);
  }
  return {leaks == 0, std::to_string(leaks) + " leaked rows over " + std::to_string(folds) + " folds"};
}

Outcome learner_sanity() {
  SyntheticConfig cfg;
  cfg.bugs = 40;
  cfg.patches_per_bug = 5;
  cfg.mode = SignalMode::Learned;
  cfg.seed = 7;
  const auto synth = generate_synthetic(cfg);
  const auto fm = learned_features(synth.corpus, synth.embeddings);
  bool ok = true;
  std::string detail;
  for (auto kind : {ModelKind::LogisticRegression, ModelKind::NaiveBayes, ModelKind::DecisionTree,
                    ModelKind::RandomForest, ModelKind::GradientBoostedTrees, ModelKind::FeedForwardNet}) {
    const double a = oof_auc(crossval(fm, kind, LearnerConfig{}, 10, 42, 0));
    ok = ok && a >= (kind == ModelKind::GradientBoostedTrees ? 0.95 : 0.9);
    detail += std::string(short_name(kind)) + "=" + fmt(a) + " ";
  }
  return {ok, detail};
}

Outcome combination_value() {
  SyntheticConfig cfg;
  cfg.bugs = 40;
  cfg.patches_per_bug = 5;
  cfg.mode = SignalMode::Xor;
  cfg.seed = 1;
  cfg.dim = 8;
  const auto synth = generate_synthetic(cfg);
  const auto learned = learned_features(synth.corpus, synth.embeddings);
  const auto engineered = engineered_features(synth.corpus);
  const LearnerConfig lc;
  const FusionConfig fc;
  const double concat =
      oof_auc(crossval(learned, engineered, Strategy::NaiveConcat, ModelKind::GradientBoostedTrees, lc, fc, 10, 42, 0));
  const double fusion =
      oof_auc(crossval(learned, engineered, Strategy::DeepFusion, ModelKind::GradientBoostedTrees, lc, fc, 10, 42, 0));
  double single = 0.0;
  std::string worst;
  for (const auto* fm : {&learned, &engineered}) {
    for (auto kind : {ModelKind::LogisticRegression, ModelKind::NaiveBayes, ModelKind::DecisionTree,
                      ModelKind::RandomForest, ModelKind::GradientBoostedTrees, ModelKind::FeedForwardNet}) {
      const double a = oof_auc(crossval(*fm, kind, lc, 10, 42, 0));
      if (a > single) {
        single = a;
        worst = std::string(fm == &learned ? "learned/" : "engineered/") + std::string(short_name(kind));
      }
    }
  }
  const bool ok = concat >= 0.85 && fusion >= 0.85 && single <= 0.75;
  return {ok, "concat+gbt=" + fmt(concat) + " fusion=" + fmt(fusion) + " best single-set=" + fmt(single) + " (" +
                  worst + ")"};
}

Outcome ensemble_algebra() {
  Rng rng(8);
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = uniform01(rng), b = uniform01(rng);
    mismatches += average_probability(a, b) != (a + b) / 2.0;
  }

  SyntheticConfig cfg;
  cfg.bugs = 20;
  cfg.dim = 8;
  const auto synth = generate_synthetic(cfg);
  const auto learned = learned_features(synth.corpus, synth.embeddings);
  const auto engineered = engineered_features(synth.corpus);
  LearnerConfig lc;
  lc.boosting.rounds = 20;
  const auto m = train_combined(Strategy::EnsembleAverage, ModelKind::GradientBoostedTrees, learned, engineered, lc,
                                FusionConfig{}, 5);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(learned.rows())));
    Eigen::VectorXd xl = learned.X.row(r).transpose(), xe = engineered.X.row(r).transpose();
    xl += 0.1 * Eigen::VectorXd::NullaryExpr(xl.size(), [&] { return normal(rng); });
    const double a = m.members[0].predict_proba(xl), b = m.members[1].predict_proba(xe);
    mismatches += m.predict_proba(xl, xe) != (a + b) / 2.0;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 2000 pairs"};
}

Outcome shap_exactness() {
  Rng rng(9);
  double worst_exact = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int p = 1 + static_cast<int>(uniform_index(rng, 4));
    const auto kind = std::array{ModelKind::DecisionTree, ModelKind::RandomForest,
                                 ModelKind::GradientBoostedTrees}[static_cast<std::size_t>(t % 3)];
    const auto model = oracle::random_model(rng, kind, p, 5);
    const auto background = uniform_rows(rng, 1 + static_cast<int>(uniform_index(rng, 30)), p);
    const Explainer ex(model, background);
    for (int r = 0; r < 3; ++r) {
      const Eigen::VectorXd x = uniform_rows(rng, 1, p).row(0).transpose();
      const auto phi = ex.explain(x).contributions;
      worst_exact = std::max(worst_exact, (phi - oracle::brute_force_shap(model, x, background)).cwiseAbs().maxCoeff());
    }
  }

  SyntheticConfig cfg;
  cfg.bugs = 40;
  cfg.patches_per_bug = 5;
  cfg.dim = 8;
  cfg.seed = 3;
  const auto synth = generate_synthetic(cfg);
  const auto fm = learned_features(synth.corpus, synth.embeddings);
  double worst_sum = 0.0;
  std::size_t explained = 0;
  LearnerConfig lc;
  for (auto kind : {ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::GradientBoostedTrees,
                    ModelKind::LogisticRegression}) {
    const auto model = train(kind, fm, lc, 1);
    const Explainer ex(model, subsample_rows(fm.X, 512, 1));
    for (Eigen::Index i = 0; i < fm.rows(); ++i) {
      const auto e = ex.explain(fm.X.row(i).transpose());
      worst_sum = std::max(worst_sum, std::abs(e.base_value + e.contributions.sum() - e.model_output));
      ++explained;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |phi - brute force| %.2e, max additivity gap %.2e over %zu explanations",
                worst_exact, worst_sum, explained);
  return {worst_exact <= 1e-9 && worst_sum <= 1e-6 && fm.rows() == 200, buf};
}

Outcome gradient_checks() {
  Rng rng(10);
  const int n = 20, p = 4;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n), w(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = normal(rng);
    y(i) = static_cast<double>(i % 2);
    w(i) = uniform(rng, 0.5, 2.0);
  }
  LogisticModel lr{Eigen::VectorXd::NullaryExpr(p, [&] { return normal(rng); }), 0.2};
  const auto g = logistic_loss_gradient(lr, X, y, w, 0.05);
  Eigen::VectorXd theta(p + 1), analytic(p + 1);
  theta << lr.weights, lr.bias;
  analytic << g.grad_w, g.grad_b;
  const double lr_err = oracle::relative_error(
      analytic, oracle::numeric_gradient(
                    [&](const Eigen::VectorXd& th) {
                      return logistic_loss_gradient(LogisticModel{th.head(p), th(p)}, X, y, w, 0.05).loss;
                    },
                    theta));

  Mlp net;
  net.layers = {Dense::init(p, 6, rng), Dense::init(6, 3, rng), Dense::init(3, 1, rng)};
  for (auto& d : net.layers) d.b.setRandom();
  const Eigen::MatrixXd cols = X.transpose();
  std::vector<Dense> grads = net.layers;
  net.loss_and_gradient(cols, y, w, &grads);
  const double net_err = oracle::relative_error(
      pack(grads), oracle::numeric_gradient(
                       [&](const Eigen::VectorXd& th) {
                         Mlp probe = net;
                         unpack(th, probe.layers);
                         return probe.loss_and_gradient(cols, y, w, nullptr);
                       },
                       pack(net.layers)));

  FusionNet fusion;
  fusion.learned = Dense::init(2, 3, rng);
  fusion.engineered = Dense::init(2, 3, rng);
  fusion.joint = Dense::init(6, 4, rng);
  fusion.head = Dense::init(4, 1, rng);
  for (Dense* d : {&fusion.learned, &fusion.engineered, &fusion.joint, &fusion.head}) d->b.setRandom();
  const Eigen::MatrixXd L = cols.topRows(2), E = cols.bottomRows(2);
  FusionNet fgrads = fusion;
  fusion.loss_and_gradient(L, E, y, w, &fgrads);
  const double fusion_err = oracle::relative_error(
      pack(fgrads.layers()), oracle::numeric_gradient(
                                 [&](const Eigen::VectorXd& th) {
                                   FusionNet probe = fusion;
                                   auto layers = probe.layers();
                                   unpack(th, layers);
                                   probe.set_layers(layers);
                                   return probe.loss_and_gradient(L, E, y, w, nullptr);
                                 },
                                 pack(fusion.layers())));
  char buf[128];
  std::snprintf(buf, sizeof buf, "relative error lr %.1e, network %.1e, fusion %.1e", lr_err, net_err, fusion_err);
  return {lr_err < 1e-4 && net_err < 1e-4 && fusion_err < 1e-4, buf};
}

// CLI walkthrough shared by the last two criteria.
const std::vector<std::string> kWalkthrough = {"gen-synthetic", "fragments", "train-embedder", "embed",
                                               "features",      "crossval",  "combine",        "explain"};

const std::vector<std::string> kArtifacts = {
    "corpus.jsonl",           "synthetic_embeddings.jsonl", "fragments.jsonl",         "embedder.json",
    "embeddings.jsonl",       "learned_features.csv",       "engineered_features.csv", "registry.json",
    "crossval_learned_gbt.json", "oof_learned_gbt.csv",     "combine_concat_gbt.json", "oof_combine_concat_gbt.csv",
    "explanations_learned_gbt.csv", "importance_learned_gbt.json", "plot_data_learned_gbt.json"};

struct Walk {
  bool ok = true;
  double seconds = 0.0;
  std::string failed_step;
};

Walk walkthrough(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  Walk w;
  for (const auto& step : kWalkthrough) {
    const std::string cmd = "cd '" + dir.string() + "' && '" + PATCHCLF_CLI + "' --out-dir out --seed 42 " + step +
                            " > " + step + ".log 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      w.ok = false;
      w.failed_step = step;
      break;
    }
  }
  w.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return w;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_root() { return fs::temp_directory_path() / "patchclf_acceptance"; }

Walk first_run;

Outcome walkthrough_runs() {
  first_run = walkthrough(scratch_root() / "run_a");
  if (!first_run.ok) return {false, "step '" + first_run.failed_step + "' failed"};
  std::string missing;
  for (const auto& a : kArtifacts) {
    if (!fs::exists(scratch_root() / "run_a" / "out" / a)) missing += a + " ";
  }
  const bool ok = missing.empty() && first_run.seconds < 600.0;
  return {ok, missing.empty() ? "all " + std::to_string(kArtifacts.size()) + " artifacts in " + fmt(first_run.seconds) + "s"
                              : "missing: " + missing};
}

Outcome determinism() {
  if (!first_run.ok) return {false, "first walkthrough failed"};
  const auto second = walkthrough(scratch_root() / "run_b");
  if (!second.ok) return {false, "step '" + second.failed_step + "' failed"};
  std::size_t compared = 0;
  std::string differ;
  for (const auto& entry : fs::directory_iterator(scratch_root() / "run_a" / "out")) {
    const auto other = scratch_root() / "run_b" / "out" / entry.path().filename();
    ++compared;
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) differ += entry.path().filename().string() + " ";
  }
  return {differ.empty() && compared > 0,
          differ.empty() ? std::to_string(compared) + " artifacts byte-identical" : "differ: " + differ};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> check;
  };
  // The walkthrough runs before determinism reuses its output.
  const std::vector<Criterion> criteria = {
      {1, "crossing dimension", 1, crossing_dimension},
      {2, "recall arithmetic", 1, recall_arithmetic},
      {3, "quartile threshold", 5, quartile_threshold},
      {4, "AUC oracle", 30, auc_oracle},
      {5, "fold hygiene", 60, fold_hygiene},
      {6, "learner sanity", 300, learner_sanity},
      {7, "combination value", 300, combination_value},
      {8, "ensemble algebra", 1, ensemble_algebra},
      {9, "SHAP exactness", 60, shap_exactness},
      {10, "gradient checks", 10, gradient_checks},
      {12, "end-to-end walkthrough", 600, walkthrough_runs},
      {11, "determinism", 1e9, determinism},
  };
  std::vector<std::string> lines(13);
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs <= c.limit_seconds;
    if (o.pass && !pass) o.detail += "; over the time limit";
    failures += !pass;
    std::ostringstream line;
    line << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << " (" << fmt(secs) << "s)";
    lines[static_cast<std::size_t>(c.id)] = line.str();
  }
  std::cout << "acceptance criteria\n";
  for (int i = 1; i <= 12; ++i) std::cout << lines[static_cast<std::size_t>(i)] << "\n";
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  fs::remove_all(scratch_root());
  return failures == 0 ? 0 : 1;
}
