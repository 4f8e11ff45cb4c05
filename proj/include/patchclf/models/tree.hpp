#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/random.hpp"

namespace patchclf {

/// Binary tree node; internal nodes send x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output (internal nodes keep their fitted value)
  double cover = 0.0;  // training weight that reached the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0

  template <typename Derived>
  int leaf_index(const Eigen::MatrixBase<Derived>& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
  }

  int depth() const;
  bool operator==(const Tree&) const = default;
};

struct TreeGrowth {
  int max_depth = 8;
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  int max_features = 0;  // features tried per split; 0 = all
};

/// CART with Gini impurity; leaves hold the weighted fraction of label 1.
Tree fit_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                             std::span<const Eigen::Index> rows, const TreeGrowth& growth, Rng& rng);

/// Second-order regression tree on per-row gradients and hessians. Splits
/// maximize G_L^2/H_L + G_R^2/H_R - G^2/H; leaves hold the Newton step
/// -G/H (before shrinkage).
Tree fit_newton_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& gradients, const Eigen::VectorXd& hessians,
                     std::span<const Eigen::Index> rows, const TreeGrowth& growth, Rng& rng);

nlohmann::json to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeGrowth& g);
TreeGrowth growth_from_json(const nlohmann::json& j, const TreeGrowth& defaults);

}  // namespace patchclf
