#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/model.hpp"
#include "patchclf/models/tree.hpp"

namespace patchclf {

struct ShapExplanation {
  std::string patch_id;
  double base_value = 0.0;
  Eigen::VectorXd contributions;
  double model_output = 0.0;
  std::string space;  // "margin" or "probability"
};

/// Fraction of the parent's background mass reaching each node (root 1).
/// A node no background row reaches splits by training cover instead, or
/// evenly when that is zero too.
std::vector<double> split_fractions(const Tree& tree, const Eigen::MatrixXd& background);

/// Exact path-dependent Shapley values of one tree, added into `phi`
/// scaled by `scale`. `condition` = +1/-1 fixes `condition_feature` on or
/// off (for interactions); 0 leaves every feature a player.
void tree_shap(const Tree& tree, const std::vector<double>& fractions, const Eigen::Ref<const Eigen::VectorXd>& x,
               double scale, Eigen::Ref<Eigen::VectorXd> phi, int condition = 0, int condition_feature = -1);

/// Expected tree output with every feature unknown.
double expected_value(const Tree& tree, const std::vector<double>& fractions);

/// Explains decision trees and forests in probability space, boosted trees
/// in margin space, and logistic regression in margin space.
class Explainer {
 public:
  Explainer(const TrainedModel& model, const Eigen::MatrixXd& background);

  ShapExplanation explain(const Eigen::Ref<const Eigen::VectorXd>& x, const std::string& patch_id = {}) const;
  /// Shapley interaction value of (a, b), symmetric in its arguments.
  double interaction(const Eigen::Ref<const Eigen::VectorXd>& x, int a, int b) const;

  double base_value() const { return base_; }
  const std::string& space() const { return space_; }
  Eigen::Index feature_count() const { return features_; }

 private:
  struct Member {
    const Tree* tree;
    double scale;
    std::vector<double> fractions;
  };

  const TrainedModel* model_;
  std::vector<Member> members_;
  Eigen::VectorXd background_mean_;
  double offset_ = 0.0;
  double base_ = 0.0;
  std::string space_;
  Eigen::Index features_ = 0;
  bool linear_ = false;

  double output(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd conditional(const Eigen::Ref<const Eigen::VectorXd>& x, int condition, int feature) const;
};

/// contribution_i = w_i (x_i - mean_i) on the margin; base = margin at mean.
ShapExplanation linear_shap(const LogisticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& background);

struct RankedFeature {
  std::string name;
  double importance = 0.0;
};

/// Mean |contribution| per feature, sorted descending (ties by name).
std::vector<RankedFeature> global_importance(const std::vector<ShapExplanation>& explanations,
                                             const std::vector<std::string>& names);

/// Seeded subsample of at most `cap` rows, kept in original order.
Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& X, Eigen::Index cap, std::uint64_t seed);

/// patch_id,feature_name,contribution rows.
std::string explanations_to_csv(const std::vector<ShapExplanation>& explanations,
                                const std::vector<std::string>& names, const nlohmann::json& provenance = nullptr);

}  // namespace patchclf
