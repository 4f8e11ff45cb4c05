#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "patchclf/crossval.hpp"
#include "patchclf/error.hpp"
#include "patchclf/pipeline.hpp"
#include "patchclf/synthetic.hpp"

using namespace patchclf;

namespace {

struct Rows {
  std::vector<std::string> patches, bugs;
  Eigen::VectorXi labels;
};

Rows rows(int bugs, int per_bug) {
  Rows r;
  r.labels.resize(bugs * per_bug);
  for (int b = 0; b < bugs; ++b) {
    for (int p = 0; p < per_bug; ++p) {
      r.patches.push_back("B" + std::to_string(b) + "_" + std::to_string(p));
      r.bugs.push_back("B" + std::to_string(b));
      r.labels(b * per_bug + p) = p == 0 ? 1 : 0;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("folds are bug-disjoint and predict each row once") {
  const auto r = rows(17, 3);
  std::vector<int> predicted(r.patches.size(), 0);
  auto runner = [&](const std::vector<Eigen::Index>& train, const std::vector<Eigen::Index>& test, std::uint64_t) {
    std::set<std::string> train_bugs;
    for (auto i : train) train_bugs.insert(r.bugs[static_cast<std::size_t>(i)]);
    for (auto i : test) {
      CHECK(train_bugs.count(r.bugs[static_cast<std::size_t>(i)]) == 0);
      ++predicted[static_cast<std::size_t>(i)];
    }
    CHECK(train.size() + test.size() == r.patches.size());
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(test.size()), 0.4).eval();
  };
  const auto report = crossval(r.patches, r.bugs, r.labels, 5, 3, runner);
  for (int n : predicted) CHECK(n == 1);
  CHECK(report.folds.size() == 5);
  REQUIRE(report.oof.size() == r.patches.size());
  for (std::size_t i = 0; i < report.oof.size(); ++i) CHECK(report.oof[i].patch_id == r.patches[i]);
  CHECK(report.micro.confusion.tn == 34);
  CHECK(report.micro.confusion.fn == 17);
}

TEST_CASE("macro averages skip undefined fold values") {
  // One bug per fold; bugs 1 and 3 hold a single label.
  Rows r = rows(4, 2);
  r.labels << 1, 0, 0, 0, 1, 0, 1, 1;
  auto runner = [&](const std::vector<Eigen::Index>&, const std::vector<Eigen::Index>& test, std::uint64_t) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) p(static_cast<Eigen::Index>(i)) = r.labels(test[i]) ? 0.9 : 0.1;
    return p;
  };
  const auto report = crossval(r.patches, r.bugs, r.labels, 4, 1, runner);
  int defined = 0;
  for (const auto& f : report.folds) defined += f.auc.defined;
  CHECK(defined == 2);
  CHECK(report.macro.auc.defined);
  CHECK(report.macro.auc.value == 1.0);
  CHECK(report.macro.accuracy.value == 1.0);
}

TEST_CASE("a single-class training split is an error") {
  Rows r = rows(3, 2);
  r.labels << 1, 1, 1, 1, 0, 0;
  auto runner = [](const std::vector<Eigen::Index>&, const std::vector<Eigen::Index>& test, std::uint64_t) {
    return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(test.size())).eval();
  };
  CHECK_THROWS_AS(crossval(r.patches, r.bugs, r.labels, 3, 1, runner), Error);
}

TEST_CASE("learner crossval does not depend on workers") {
  SyntheticConfig cfg;
  cfg.bugs = 12;
  cfg.dim = 8;
  const auto s = generate_synthetic(cfg);
  const auto fm = learned_features(s.corpus, s.embeddings);
  LearnerConfig lc;
  lc.random_forest.trees = 10;
  const auto a = crossval(fm, ModelKind::RandomForest, lc, 4, 9, 1);
  const auto b = crossval(fm, ModelKind::RandomForest, lc, 4, 9, 3);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(oof_to_csv(a.oof) == oof_to_csv(b.oof));
}

TEST_CASE("prediction CSV round-trip and comparison") {
  std::vector<OofPrediction> a = {{"p1", "b1", 1, 0.9, 0}, {"p2", "b1", 0, 0.8, 0}, {"p3", "b2", 1, 0.2, 1},
                                  {"p4", "b2", 0, 0.1, 1}};
  const auto back = parse_oof_csv(oof_to_csv(a, {{"seed", 1}}));
  REQUIRE(back.size() == 4);
  CHECK(back[1].probability == 0.8);
  CHECK(back[2].fold == 1);

  std::vector<OofPrediction> b = {{"p1", "b1", 1, 0.4, 0}, {"p2", "b1", 0, 0.3, 0}, {"p3", "b2", 1, 0.7, 1},
                                  {"p9", "b3", 0, 0.1, 1}};
  const auto c = compare(a, b);
  CHECK(c.matched == 3);
  CHECK(c.unmatched == 2);
  CHECK(c.correct_patches.only_a == 1);
  CHECK(c.correct_patches.only_b == 1);
  CHECK(c.incorrect_patches.only_b == 1);
  CHECK(c.incorrect_patches.both == 0);
}
