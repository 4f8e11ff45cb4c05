#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/features.hpp"
#include "patchclf/models/ensemble.hpp"
#include "patchclf/models/linear.hpp"
#include "patchclf/models/network.hpp"

namespace patchclf {

enum class ModelKind { LogisticRegression, NaiveBayes, DecisionTree, RandomForest, GradientBoostedTrees, FeedForwardNet };

/// Short CLI names: lr, nb, dt, rf, gbt, dnn.
std::string_view short_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Hyperparameters for every learner; all fields carry committed defaults.
struct LearnerConfig {
  LogisticConfig logistic;
  NaiveBayesConfig naive_bayes;
  DecisionTreeConfig decision_tree;
  RandomForestConfig random_forest;
  BoostingConfig boosting;
  NetworkConfig network;
  bool balance_classes = false;  // inverse-frequency sample weights
  unsigned workers = 0;          // forest build threads; 0 = hardware

  nlohmann::json for_kind(ModelKind kind) const;
};

void to_json(nlohmann::json& j, const LearnerConfig& c);
void from_json(const nlohmann::json& j, LearnerConfig& c);

class TrainedModel {
 public:
  using Parameters = std::variant<LogisticModel, NaiveBayesModel, DecisionTreeModel, RandomForestModel, BoostedModel,
                                  NetworkModel>;

  TrainedModel(ModelKind kind, Parameters params, Eigen::Index feature_count, nlohmann::json training_config,
               std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  Eigen::Index feature_count() const { return feature_count_; }
  std::uint64_t seed() const { return seed_; }
  const nlohmann::json& training_config() const { return training_config_; }
  const Parameters& parameters() const { return params_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(params_);
  }

  /// Probability of label 1 (correct). Throws on a length mismatch.
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& X) const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

 private:
  ModelKind kind_;
  Parameters params_;
  Eigen::Index feature_count_;
  nlohmann::json training_config_;
  std::uint64_t seed_;
};

/// Requires at least two rows, both labels present and finite features.
TrainedModel train(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const LearnerConfig& config,
                   std::uint64_t seed);
TrainedModel train(ModelKind kind, const FeatureMatrix& data, const LearnerConfig& config, std::uint64_t seed);

/// Unit weights, or inverse class frequency when balancing is enabled.
Eigen::VectorXd sample_weights(const Eigen::VectorXi& y, bool balance);

}  // namespace patchclf
