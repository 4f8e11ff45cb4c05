#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/features.hpp"
#include "patchclf/math.hpp"
#include "patchclf/model.hpp"
#include "patchclf/models/network.hpp"

namespace patchclf {

enum class Strategy { EnsembleAverage, NaiveConcat, DeepFusion };

/// CLI names: ensemble, concat, fusion.
std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

/// Mean of the two member probabilities.
inline double average_probability(double a, double b) { return (a + b) / 2.0; }

double ensemble_average(const TrainedModel& learned, const TrainedModel& engineered,
                        const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                        const Eigen::Ref<const Eigen::VectorXd>& engineered_x);

/// [learned | engineered], names preserved. Throws naming the first patch
/// that is missing from either side.
FeatureMatrix naive_concat(const FeatureMatrix& learned, const FeatureMatrix& engineered);
Eigen::VectorXd naive_concat(const Eigen::Ref<const Eigen::VectorXd>& learned,
                             const Eigen::Ref<const Eigen::VectorXd>& engineered);

struct FusionConfig {
  int learned_width = 32;
  int engineered_width = 16;
  int joint_width = 16;  // rectified layer over both towers; 0 = linear head
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
};

void to_json(nlohmann::json& j, const FusionConfig& c);
void from_json(const nlohmann::json& j, FusionConfig& c);

/// Two rectified towers whose hidden outputs are concatenated and fed to a
/// joint head (optional rectified layer, then one sigmoid unit). Inputs are
/// standardized columns (samples as columns).
struct FusionNet {
  Dense learned;
  Dense engineered;
  Dense joint;  // empty when the head is linear
  Dense head;   // 1 x (joint width, or learned + engineered width)

  Eigen::VectorXd margins(const Eigen::MatrixXd& learned_in, const Eigen::MatrixXd& engineered_in) const;

  /// Weighted mean cross-entropy; `grads` receives dLoss/dparam when
  /// non-null.
  double loss_and_gradient(const Eigen::MatrixXd& learned_in, const Eigen::MatrixXd& engineered_in,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& weights, FusionNet* grads) const;

  bool has_joint() const { return joint.W.size() > 0; }
  std::vector<Dense> layers() const { return {learned, engineered, joint, head}; }
  void set_layers(const std::vector<Dense>& l);
};

struct FusionModel {
  Standardizer learned_scaler;
  Standardizer engineered_scaler;
  FusionNet net;

  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                       const Eigen::Ref<const Eigen::VectorXd>& engineered_x) const;
};

FusionModel deep_fusion_train(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& engineered,
                              const Eigen::VectorXi& y, const FusionConfig& config, std::uint64_t seed);

nlohmann::json to_json(const FusionModel& m);
FusionModel fusion_from_json(const nlohmann::json& j);

/// One fitted combination. Ensemble keeps two members, concat keeps one
/// model over [learned | engineered], fusion keeps the two-tower network.
struct CombinedModel {
  Strategy strategy = Strategy::NaiveConcat;
  std::vector<TrainedModel> members;
  std::optional<FusionModel> fusion;
  Eigen::Index learned_width = 0;
  Eigen::Index engineered_width = 0;

  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                       const Eigen::Ref<const Eigen::VectorXd>& engineered_x) const;
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& engineered) const;

  nlohmann::json to_json() const;
  static CombinedModel from_json(const nlohmann::json& j);
};

/// Rows of the two matrices must be aligned by patch id.
CombinedModel train_combined(Strategy strategy, ModelKind kind, const FeatureMatrix& learned,
                             const FeatureMatrix& engineered, const LearnerConfig& learner,
                             const FusionConfig& fusion, std::uint64_t seed);

}  // namespace patchclf
