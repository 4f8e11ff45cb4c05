#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "patchclf/error.hpp"
#include "patchclf/model.hpp"

using namespace patchclf;

namespace {

struct Toy {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
};

// Label follows the sign of x0 + x1 with a small margin of noise.
Toy separable(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Toy t{Eigen::MatrixXd(n, p), Eigen::VectorXi(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) t.X(i, j) = normal(rng);
    t.y(i) = t.X(i, 0) + t.X(i, 1) > 0 ? 1 : 0;
  }
  return t;
}

double accuracy(const TrainedModel& m, const Toy& t) {
  const auto p = m.predict_batch(t.X);
  int hit = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) hit += (p(i) >= 0.5) == (t.y(i) == 1);
  return static_cast<double>(hit) / static_cast<double>(p.size());
}

}  // namespace

TEST_CASE("logistic gradient matches finite differences") {
  Rng rng(1);
  const auto t = separable(25, 4, 2);
  Eigen::VectorXd w(25);
  for (int i = 0; i < 25; ++i) w(i) = uniform(rng, 0.5, 2.0);
  const Eigen::VectorXd y = t.y.cast<double>();
  LogisticModel m;
  m.weights = Eigen::VectorXd::Random(4);
  m.bias = 0.3;
  const double l2 = 0.1;

  const auto analytic = logistic_loss_gradient(m, t.X, y, w, l2);
  Eigen::VectorXd theta(5);
  theta << m.weights, m.bias;
  auto loss = [&](const Eigen::VectorXd& th) {
    LogisticModel probe{th.head(4), th(4)};
    return logistic_loss_gradient(probe, t.X, y, w, l2).loss;
  };
  Eigen::VectorXd g(5);
  g << analytic.grad_w, analytic.grad_b;
  CHECK(oracle::relative_error(g, oracle::numeric_gradient(loss, theta)) < 1e-4);
}

TEST_CASE("network gradient matches finite differences") {
  Rng rng(4);
  Mlp net;
  net.layers = {Dense::init(3, 5, rng), Dense::init(5, 4, rng), Dense::init(4, 1, rng)};
  for (auto& d : net.layers) d.b.setRandom();
  Eigen::MatrixXd in(3, 12);
  Eigen::VectorXd y(12), w(12);
  for (int c = 0; c < 12; ++c) {
    for (int r = 0; r < 3; ++r) in(r, c) = normal(rng);
    y(c) = static_cast<double>(c % 2);
    w(c) = uniform(rng, 0.5, 1.5);
  }
  std::vector<Dense> grads = net.layers;
  net.loss_and_gradient(in, y, w, &grads);
  const Eigen::VectorXd theta = pack(net.layers);
  auto loss = [&](const Eigen::VectorXd& th) {
    Mlp probe = net;
    unpack(th, probe.layers);
    return probe.loss_and_gradient(in, y, w, nullptr);
  };
  CHECK(oracle::relative_error(pack(grads), oracle::numeric_gradient(loss, theta)) < 1e-4);
}

TEST_CASE("every learner separates a linear problem") {
  const auto train_set = separable(200, 5, 7);
  const auto test_set = separable(200, 5, 8);
  LearnerConfig cfg;
  cfg.random_forest.trees = 30;
  cfg.network.epochs = 60;
  for (auto kind : {ModelKind::LogisticRegression, ModelKind::NaiveBayes, ModelKind::DecisionTree,
                    ModelKind::RandomForest, ModelKind::GradientBoostedTrees, ModelKind::FeedForwardNet}) {
    const auto m = train(kind, train_set.X, train_set.y, cfg, 3);
    CHECK_MESSAGE(accuracy(m, test_set) >= 0.85, short_name(kind));
    const auto back = TrainedModel::from_json(m.to_json());
    CHECK(back.predict_batch(test_set.X) == m.predict_batch(test_set.X));
  }
}

TEST_CASE("training is seeded") {
  const auto t = separable(80, 4, 9);
  LearnerConfig cfg;
  cfg.random_forest.trees = 10;
  cfg.network.epochs = 20;
  for (auto kind : {ModelKind::RandomForest, ModelKind::FeedForwardNet, ModelKind::GradientBoostedTrees}) {
    CHECK(train(kind, t.X, t.y, cfg, 5).predict_batch(t.X) == train(kind, t.X, t.y, cfg, 5).predict_batch(t.X));
  }
}

TEST_CASE("forest does not depend on worker count") {
  const auto t = separable(60, 4, 10);
  RandomForestConfig cfg;
  cfg.trees = 12;
  const Eigen::VectorXd y = t.y.cast<double>();
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(60);
  const auto a = fit_random_forest(t.X, y, w, cfg, 1, 1);
  const auto b = fit_random_forest(t.X, y, w, cfg, 1, 4);
  CHECK(a.trees == b.trees);
}

TEST_CASE("boosting loss never increases") {
  const auto t = separable(120, 4, 11);
  BoostingConfig cfg;
  cfg.rounds = 40;
  cfg.learning_rate = 0.5;
  const auto m = fit_boosted(t.X, t.y.cast<double>(), Eigen::VectorXd::Ones(120), cfg, 1);
  REQUIRE(m.training_loss.size() == 41);
  for (std::size_t i = 1; i < m.training_loss.size(); ++i) CHECK(m.training_loss[i] <= m.training_loss[i - 1] + 1e-12);
}

TEST_CASE("learner input checks") {
  LearnerConfig cfg;
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
  Eigen::VectorXi ones = Eigen::VectorXi::Ones(4);
  CHECK_THROWS_AS(train(ModelKind::LogisticRegression, X, ones, cfg, 1), Error);
  Eigen::VectorXi y(4);
  y << 0, 1, 0, 1;
  X(0, 0) = std::nan("");
  CHECK_THROWS_AS(train(ModelKind::LogisticRegression, X, y, cfg, 1), Error);
  X(0, 0) = 0;
  const auto m = train(ModelKind::LogisticRegression, X, y, cfg, 1);
  CHECK_THROWS_AS(m.predict_proba(Eigen::VectorXd::Zero(3)), Error);
  CHECK_THROWS_AS(parse_model_kind("svm"), Error);
}

TEST_CASE("balanced weights") {
  Eigen::VectorXi y(4);
  y << 1, 0, 0, 0;
  const auto w = sample_weights(y, true);
  CHECK(w(0) * 1 == doctest::Approx(w(1) * 3));
  CHECK(sample_weights(y, false) == Eigen::VectorXd::Ones(4));
}
