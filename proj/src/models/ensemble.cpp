#include "patchclf/models/ensemble.hpp"

#include <cmath>
#include <numeric>

#include "patchclf/error.hpp"
#include "patchclf/math.hpp"
#include "patchclf/parallel.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

namespace {

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

}  // namespace

DecisionTreeModel fit_decision_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                                    const DecisionTreeConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const auto rows = all_rows(X.rows());
  return {fit_classification_tree(X, y, weights, rows, config.growth, rng)};
}

double RandomForestModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return trees.empty() ? 0.5 : sum / static_cast<double>(trees.size());
}

RandomForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, const RandomForestConfig& config,
                                    std::uint64_t seed, unsigned workers) {
  if (config.trees < 1) throw Error("learn", "random forest needs at least one tree");
  TreeGrowth growth = config.growth;
  if (growth.max_features <= 0) {
    growth.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols())))));
  }
  RandomForestModel model;
  model.trees.resize(static_cast<std::size_t>(config.trees));
  const auto n = X.rows();
  parallel_for(model.trees.size(), workers, [&](std::size_t t) {
    Rng rng(mix_seed(seed, t));
    std::vector<Eigen::Index> rows;
    if (config.bootstrap) {
      rows.resize(static_cast<std::size_t>(n));
      for (auto& r : rows) r = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
    } else {
      rows = all_rows(n);
    }
    model.trees[t] = fit_classification_tree(X, y, weights, rows, growth, rng);
  });
  return model;
}

double BoostedModel::margin(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double z = init;
  for (const auto& t : trees) z += t.predict(x);
  return z;
}

double BoostedModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const { return sigmoid(margin(x)); }

BoostedModel fit_boosted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         const BoostingConfig& config, std::uint64_t seed) {
  const auto n = X.rows();
  const double total = weights.sum();
  const double base_rate = weights.dot(y) / total;
  if (base_rate <= 0.0 || base_rate >= 1.0) throw Error("learn", "boosting needs both classes");

  BoostedModel model;
  model.init = logit(base_rate);
  Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, model.init);
  auto weighted_loss = [&](Eigen::Index i, double z) { return weights(i) * log_loss_from_margin(z, y(i)); };
  auto total_loss = [&] {
    double l = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) l += weighted_loss(i, margin(i));
    return l / total;
  };
  model.training_loss.push_back(total_loss());

  Rng rng(seed);
  const auto rows = all_rows(n);
  Eigen::VectorXd grad(n), hess(n);
  for (int round = 0; round < config.rounds; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(margin(i));
      grad(i) = weights(i) * (p - y(i));
      hess(i) = weights(i) * std::max(p * (1.0 - p), 1e-16);
    }
    Tree tree = fit_newton_tree(X, grad, hess, rows, config.growth, rng);

    std::vector<std::vector<Eigen::Index>> members(tree.nodes.size());
    for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(tree.leaf_index(X.row(i).transpose()))].push_back(i);
    for (std::size_t leaf = 0; leaf < tree.nodes.size(); ++leaf) {
      auto& node = tree.nodes[leaf];
      node.value *= config.learning_rate;
      if (!node.is_leaf()) continue;
      double before = 0.0;
      for (auto i : members[leaf]) before += weighted_loss(i, margin(i));
      for (int halvings = 0;; ++halvings) {
        double after = 0.0;
        for (auto i : members[leaf]) after += weighted_loss(i, margin(i) + node.value);
        if (after <= before) break;
        if (halvings >= 50) {
          node.value = 0.0;
          break;
        }
        node.value *= 0.5;
      }
      for (auto i : members[leaf]) margin(i) += node.value;
    }
    const double loss = total_loss();
    if (!std::isfinite(loss)) throw Error("learn", "boosting loss is not finite");
    model.training_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void to_json(nlohmann::json& j, const DecisionTreeConfig& c) { j = {{"growth", to_json(c.growth)}}; }

void from_json(const nlohmann::json& j, DecisionTreeConfig& c) {
  const DecisionTreeConfig d;
  c.growth = j.contains("growth") ? growth_from_json(j["growth"], d.growth) : d.growth;
}

void to_json(nlohmann::json& j, const RandomForestConfig& c) {
  j = {{"trees", c.trees}, {"growth", to_json(c.growth)}, {"bootstrap", c.bootstrap}};
}

void from_json(const nlohmann::json& j, RandomForestConfig& c) {
  const RandomForestConfig d;
  c.trees = j.value("trees", d.trees);
  c.growth = j.contains("growth") ? growth_from_json(j["growth"], d.growth) : d.growth;
  c.bootstrap = j.value("bootstrap", d.bootstrap);
}

void to_json(nlohmann::json& j, const BoostingConfig& c) {
  j = {{"rounds", c.rounds}, {"learning_rate", c.learning_rate}, {"growth", to_json(c.growth)}};
}

void from_json(const nlohmann::json& j, BoostingConfig& c) {
  const BoostingConfig d;
  c.rounds = j.value("rounds", d.rounds);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.growth = j.contains("growth") ? growth_from_json(j["growth"], d.growth) : d.growth;
}

nlohmann::json to_json(const RandomForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"trees", trees}};
}

RandomForestModel forest_from_json(const nlohmann::json& j) {
  RandomForestModel m;
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  if (m.trees.empty()) throw Error("learn", "forest has no trees");
  return m;
}

nlohmann::json to_json(const BoostedModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"init", m.init}, {"trees", trees}, {"training_loss", m.training_loss}};
}

BoostedModel boosted_from_json(const nlohmann::json& j) {
  BoostedModel m;
  m.init = j.at("init").get<double>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  m.training_loss = j.value("training_loss", std::vector<double>{});
  return m;
}

}  // namespace patchclf
