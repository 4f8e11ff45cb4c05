#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "patchclf/combine.hpp"
#include "patchclf/error.hpp"

using namespace patchclf;

namespace {

FeatureMatrix table(const std::vector<std::string>& ids, Eigen::MatrixXd X, const std::string& prefix) {
  FeatureMatrix m;
  for (Eigen::Index c = 0; c < X.cols(); ++c) m.names.push_back(prefix + std::to_string(c));
  m.patch_ids = ids;
  for (const auto& id : ids) m.bug_ids.push_back("bug-" + id);
  m.X = std::move(X);
  m.y = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(ids.size()));
  for (Eigen::Index i = 0; i < m.y.size(); i += 2) m.y(i) = 1;
  return m;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

}  // namespace

TEST_CASE("ensemble average is the plain mean") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double a = uniform01(rng), b = uniform01(rng);
    CHECK(average_probability(a, b) == (a + b) / 2.0);
  }
}

TEST_CASE("naive concat aligns rows by patch id") {
  Eigen::MatrixXd L(3, 2), E(3, 1);
  L << 1, 2, 3, 4, 5, 6;
  E << 30, 10, 20;
  const auto learned = table({"a", "b", "c"}, L, "B-");
  const auto engineered = table({"c", "a", "b"}, E, "e");
  const auto both = naive_concat(learned, engineered);
  REQUIRE(both.cols() == 3);
  CHECK(both.names == std::vector<std::string>{"B-0", "B-1", "e0"});
  CHECK(both.X(0, 2) == 10);
  CHECK(both.X(1, 2) == 20);
  CHECK(both.X(2, 2) == 30);

  const auto missing = table({"a", "b", "x"}, E, "e");
  try {
    naive_concat(learned, missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("patch c") != std::string::npos);
  }
  Eigen::VectorXd a(2), b(1);
  a << 1, 2;
  b << 3;
  CHECK(naive_concat(a, b) == Eigen::Vector3d(1, 2, 3));
}

TEST_CASE("fusion gradient matches finite differences") {
  Rng rng(6);
  for (int joint : {0, 4}) {
    FusionNet net;
    net.learned = Dense::init(5, 3, rng);
    net.engineered = Dense::init(4, 2, rng);
    if (joint > 0) net.joint = Dense::init(5, joint, rng);
    net.head = Dense::init(joint > 0 ? joint : 5, 1, rng);
    // Nonzero biases keep pre-activations off the rectifier kink.
    for (Dense* d : {&net.learned, &net.engineered, &net.joint, &net.head}) d->b.setRandom();
    Eigen::MatrixXd L(5, 10), E(4, 10);
    Eigen::VectorXd y(10), w(10);
    for (int c = 0; c < 10; ++c) {
      for (int r = 0; r < 5; ++r) L(r, c) = normal(rng);
      for (int r = 0; r < 4; ++r) E(r, c) = normal(rng);
      y(c) = static_cast<double>(c % 2);
      w(c) = uniform(rng, 0.5, 1.5);
    }
    FusionNet grads = net;
    net.loss_and_gradient(L, E, y, w, &grads);
    auto loss = [&](const Eigen::VectorXd& th) {
      FusionNet probe = net;
      auto layers = probe.layers();
      unpack(th, layers);
      probe.set_layers(layers);
      return probe.loss_and_gradient(L, E, y, w, nullptr);
    };
    CHECK(oracle::relative_error(pack(grads.layers()), oracle::numeric_gradient(loss, pack(net.layers()))) < 1e-4);
  }
}

TEST_CASE("untrained fusion forward pass") {
  Rng rng(8);
  Eigen::MatrixXd L(12, 3), E(12, 2);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 3; ++j) L(i, j) = normal(rng);
    for (int j = 0; j < 2; ++j) E(i, j) = normal(rng);
  }
  Eigen::VectorXi y(12);
  for (int i = 0; i < 12; ++i) y(i) = i % 2;
  FusionConfig cfg;
  cfg.epochs = 0;
  const auto m = deep_fusion_train(L, E, y, cfg, 1);
  const auto& n = m.net;
  for (int i = 0; i < 12; ++i) {
    const Eigen::VectorXd l = (L.row(i).transpose() - m.learned_scaler.mean).cwiseQuotient(m.learned_scaler.scale);
    const Eigen::VectorXd e = (E.row(i).transpose() - m.engineered_scaler.mean).cwiseQuotient(m.engineered_scaler.scale);
    Eigen::VectorXd h(cfg.learned_width + cfg.engineered_width);
    h << relu(n.learned.W * l + n.learned.b), relu(n.engineered.W * e + n.engineered.b);
    const Eigen::VectorXd j = relu(n.joint.W * h + n.joint.b);
    const double z = (n.head.W * j + n.head.b)(0);
    CHECK(m.predict_proba(L.row(i).transpose(), E.row(i).transpose()) == doctest::Approx(1.0 / (1.0 + std::exp(-z))));
  }
}

TEST_CASE("combined models round-trip") {
  Rng rng(9);
  std::vector<std::string> ids;
  Eigen::MatrixXd L(40, 3), E(40, 2);
  for (int i = 0; i < 40; ++i) {
    ids.push_back("p" + std::to_string(i));
    for (int j = 0; j < 3; ++j) L(i, j) = normal(rng);
    for (int j = 0; j < 2; ++j) E(i, j) = normal(rng);
  }
  const auto learned = table(ids, L, "B-");
  const auto engineered = table(ids, E, "e");
  LearnerConfig cfg;
  FusionConfig fusion;
  fusion.epochs = 5;
  for (auto s : {Strategy::EnsembleAverage, Strategy::NaiveConcat, Strategy::DeepFusion}) {
    const auto m = train_combined(s, ModelKind::GradientBoostedTrees, learned, engineered, cfg, fusion, 3);
    const auto back = CombinedModel::from_json(m.to_json());
    CHECK(back.predict_batch(L, E) == m.predict_batch(L, E));
    CHECK(parse_strategy(to_string(s)) == s);
    if (s == Strategy::EnsembleAverage) {
      const double expect = average_probability(m.members[0].predict_proba(L.row(0).transpose()),
                                                m.members[1].predict_proba(E.row(0).transpose()));
      CHECK(m.predict_proba(L.row(0).transpose(), E.row(0).transpose()) == expect);
    }
  }
  CHECK_THROWS_AS(parse_strategy("stack"), Error);
}
