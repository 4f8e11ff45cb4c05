#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/models/tree.hpp"

namespace patchclf {

struct DecisionTreeConfig {
  TreeGrowth growth{8, 1, 2, 0};
};

struct DecisionTreeModel {
  Tree tree;
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const { return tree.predict(x); }
};

DecisionTreeModel fit_decision_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                                    const DecisionTreeConfig& config, std::uint64_t seed);

struct RandomForestConfig {
  int trees = 100;
  TreeGrowth growth{16, 1, 2, 0};  // max_features 0 = floor(sqrt(p))
  bool bootstrap = true;
};

/// Mean of per-tree leaf probabilities.
struct RandomForestModel {
  std::vector<Tree> trees;
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Tree t draws from mix_seed(seed, t), so the forest does not depend on
/// how many workers build it.
RandomForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, const RandomForestConfig& config,
                                    std::uint64_t seed, unsigned workers = 0);

struct BoostingConfig {
  int rounds = 100;
  double learning_rate = 0.1;
  TreeGrowth growth{3, 1, 2, 0};
};

/// Logistic-loss boosting. margin(x) = init + sum of tree outputs (the
/// learning rate is already folded into the leaf values).
struct BoostedModel {
  double init = 0.0;
  std::vector<Tree> trees;
  std::vector<double> training_loss;  // after each round; index 0 = init only

  double margin(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Each leaf step is halved until that leaf's weighted loss does not
/// increase, so training loss is non-increasing round over round.
BoostedModel fit_boosted(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         const BoostingConfig& config, std::uint64_t seed);

void to_json(nlohmann::json& j, const DecisionTreeConfig& c);
void from_json(const nlohmann::json& j, DecisionTreeConfig& c);
void to_json(nlohmann::json& j, const RandomForestConfig& c);
void from_json(const nlohmann::json& j, RandomForestConfig& c);
void to_json(nlohmann::json& j, const BoostingConfig& c);
void from_json(const nlohmann::json& j, BoostingConfig& c);

nlohmann::json to_json(const RandomForestModel& m);
RandomForestModel forest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoostedModel& m);
BoostedModel boosted_from_json(const nlohmann::json& j);

}  // namespace patchclf
