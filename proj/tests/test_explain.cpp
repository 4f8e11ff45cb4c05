#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "patchclf/error.hpp"
#include "patchclf/explain.hpp"

using namespace patchclf;

namespace {

Eigen::MatrixXd uniform_rows(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, -1, 1);
  return m;
}

}  // namespace

TEST_CASE("tree SHAP equals subset enumeration") {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    const int p = 1 + static_cast<int>(uniform_index(rng, 4));
    const auto kind = std::array{ModelKind::DecisionTree, ModelKind::RandomForest,
                                 ModelKind::GradientBoostedTrees}[static_cast<std::size_t>(t % 3)];
    const auto model = oracle::random_model(rng, kind, p, 4);
    // Small backgrounds leave some nodes unreached, exercising the cover fallback.
    const auto background = uniform_rows(rng, 1 + static_cast<int>(uniform_index(rng, 8)), p);
    const Explainer ex(model, background);
    for (int r = 0; r < 5; ++r) {
      const Eigen::VectorXd x = uniform_rows(rng, 1, p).row(0).transpose();
      const auto e = ex.explain(x);
      const auto brute = oracle::brute_force_shap(model, x, background);
      CHECK((e.contributions - brute).cwiseAbs().maxCoeff() <= 1e-9);
      const auto v = oracle::value_function(model, x, background);
      CHECK(std::abs(e.base_value - v(0)) <= 1e-9);
      CHECK(std::abs(e.base_value + e.contributions.sum() - e.model_output) <= 1e-9);
    }
  }
}

TEST_CASE("interaction values equal the Shapley interaction index") {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const int p = 2 + static_cast<int>(uniform_index(rng, 3));
    const auto model = oracle::random_model(rng, t % 2 ? ModelKind::RandomForest : ModelKind::GradientBoostedTrees, p, 4);
    const auto background = uniform_rows(rng, 20, p);
    const Explainer ex(model, background);
    const Eigen::VectorXd x = uniform_rows(rng, 1, p).row(0).transpose();
    const auto v = oracle::value_function(model, x, background);
    for (int a = 0; a < p; ++a) {
      for (int b = a + 1; b < p; ++b) {
        const double expect = oracle::shapley_interaction(v, p, a, b);
        CHECK(std::abs(ex.interaction(x, a, b) - expect) <= 1e-9);
        CHECK(ex.interaction(x, a, b) == doctest::Approx(ex.interaction(x, b, a)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("output spaces") {
  Rng rng(41);
  const auto background = uniform_rows(rng, 10, 3);
  CHECK(Explainer(oracle::random_model(rng, ModelKind::DecisionTree, 3, 3), background).space() == "probability");
  CHECK(Explainer(oracle::random_model(rng, ModelKind::RandomForest, 3, 3), background).space() == "probability");
  CHECK(Explainer(oracle::random_model(rng, ModelKind::GradientBoostedTrees, 3, 3), background).space() == "margin");
}

TEST_CASE("linear explanation") {
  LogisticModel m{Eigen::Vector3d(1, -2, 0.5), 0.25};
  Eigen::MatrixXd background(2, 3);
  background << 0, 0, 0, 2, 2, 2;
  const Eigen::Vector3d x(3, 1, -1);
  const auto e = linear_shap(m, x, background);
  CHECK(e.base_value == doctest::Approx(0.25 + (1 - 2 + 0.5)));
  CHECK(e.contributions(0) == doctest::Approx(2));
  CHECK(e.contributions(1) == doctest::Approx(0));
  CHECK(e.contributions(2) == doctest::Approx(-1));
  CHECK(e.base_value + e.contributions.sum() == doctest::Approx(e.model_output));

  const TrainedModel tm(ModelKind::LogisticRegression, m, 3, nlohmann::json::object(), 0);
  const Explainer ex(tm, background);
  CHECK(ex.explain(x).contributions == e.contributions);
  CHECK(ex.interaction(x, 0, 1) == 0.0);
}

TEST_CASE("unsupported learners and bad inputs") {
  Rng rng(43);
  const auto background = uniform_rows(rng, 5, 2);
  const TrainedModel nb(ModelKind::NaiveBayes, NaiveBayesModel{}, 2, nlohmann::json::object(), 0);
  CHECK_THROWS_AS(Explainer(nb, background), Error);
  const auto dt = oracle::random_model(rng, ModelKind::DecisionTree, 2, 2);
  CHECK_THROWS_AS(Explainer(dt, Eigen::MatrixXd(0, 2)), Error);
  CHECK_THROWS_AS(Explainer(dt, background).explain(Eigen::VectorXd::Zero(3)), Error);
  CHECK_THROWS_AS(Explainer(dt, background).interaction(Eigen::VectorXd::Zero(2), 1, 1), Error);
}

TEST_CASE("global importance ranks by mean absolute contribution") {
  std::vector<ShapExplanation> e(2);
  e[0].contributions = Eigen::Vector3d(1, -3, 0);
  e[1].contributions = Eigen::Vector3d(-1, 1, 2);
  const auto r = global_importance(e, {"a", "b", "c"});
  CHECK(r[0].name == "b");
  CHECK(r[0].importance == 2.0);
  CHECK(r[1].name == "a");
  CHECK(r[2].name == "c");
}

TEST_CASE("background subsample") {
  Rng rng(47);
  const auto X = uniform_rows(rng, 50, 2);
  const auto s = subsample_rows(X, 10, 3);
  CHECK(s.rows() == 10);
  CHECK(s == subsample_rows(X, 10, 3));
  CHECK(subsample_rows(X, 100, 3) == X);
}
