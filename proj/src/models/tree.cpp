#include "patchclf/models/tree.hpp"

#include <algorithm>
#include <numeric>

#include "patchclf/error.hpp"

namespace patchclf {

namespace {

constexpr double kMinGain = 1e-12;

// Per-row sufficient statistics (a, b); a node's score is score(sum a, sum b)
// and a split is worth score(L) + score(R) - score(parent).
struct Criterion {
  double (*score)(double a, double b);
  double (*leaf)(double a, double b);
};

double gini_score(double a, double b) { return b > 0 ? (a * a + (b - a) * (b - a)) / b : 0.0; }
double gini_leaf(double a, double b) { return b > 0 ? a / b : 0.0; }
double newton_score(double a, double b) { return b > 1e-12 ? a * a / b : 0.0; }
double newton_leaf(double a, double b) { return b > 1e-12 ? -a / b : 0.0; }

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = kMinGain;
};

class Builder {
 public:
  Builder(const Eigen::MatrixXd& X, const Eigen::VectorXd& a, const Eigen::VectorXd& b, const TreeGrowth& growth,
          Criterion criterion, Rng& rng)
      : X_(X), a_(a), b_(b), growth_(growth), criterion_(criterion), rng_(rng) {}

  Tree build(std::span<const Eigen::Index> rows) {
    Tree tree;
    std::vector<Eigen::Index> root(rows.begin(), rows.end());
    grow(tree, std::move(root), 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<Eigen::Index> rows, int depth) {
    double sa = 0.0, sb = 0.0;
    for (auto r : rows) {
      sa += a_(r);
      sb += b_(r);
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    {
      auto& node = tree.nodes.back();
      node.value = criterion_.leaf(sa, sb);
      node.cover = sb;
    }

    const auto n = static_cast<int>(rows.size());
    if (depth >= growth_.max_depth || n < growth_.min_samples_split || n < 2 * growth_.min_samples_leaf) return index;

    const Split split = best_split(rows, sa, sb);
    if (split.feature < 0) return index;

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (X_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::vector<int> candidate_features() {
    const int p = static_cast<int>(X_.cols());
    std::vector<int> features(static_cast<std::size_t>(p));
    std::iota(features.begin(), features.end(), 0);
    const int m = growth_.max_features;
    if (m > 0 && m < p) {
      for (int i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(i) + uniform_index(rng_, static_cast<std::size_t>(p - i));
        std::swap(features[static_cast<std::size_t>(i)], features[j]);
      }
      features.resize(static_cast<std::size_t>(m));
    }
    return features;
  }

  Split best_split(const std::vector<Eigen::Index>& rows, double sa, double sb) {
    Split best;
    const double parent = criterion_.score(sa, sb);
    const int min_leaf = std::max(1, growth_.min_samples_leaf);
    std::vector<Eigen::Index> order(rows);
    for (int f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        const double xi = X_(i, f), xj = X_(j, f);
        return xi < xj || (xi == xj && i < j);
      });
      double la = 0.0, lb = 0.0;
      const int n = static_cast<int>(order.size());
      for (int i = 0; i + 1 < n; ++i) {
        la += a_(order[static_cast<std::size_t>(i)]);
        lb += b_(order[static_cast<std::size_t>(i)]);
        const double here = X_(order[static_cast<std::size_t>(i)], f);
        const double next = X_(order[static_cast<std::size_t>(i) + 1], f);
        if (here == next) continue;
        if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
        const double gain = criterion_.score(la, lb) + criterion_.score(sa - la, sb - lb) - parent;
        if (gain > best.gain) {
          double threshold = here + (next - here) / 2.0;
          if (!(threshold < next)) threshold = here;
          best = {f, threshold, gain};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& a_;
  const Eigen::VectorXd& b_;
  TreeGrowth growth_;
  Criterion criterion_;
  Rng& rng_;
};

}  // namespace

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

Tree fit_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                             std::span<const Eigen::Index> rows, const TreeGrowth& growth, Rng& rng) {
  const Eigen::VectorXd a = weights.cwiseProduct(y);
  return Builder(X, a, weights, growth, {gini_score, gini_leaf}, rng).build(rows);
}

Tree fit_newton_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& gradients, const Eigen::VectorXd& hessians,
                     std::span<const Eigen::Index> rows, const TreeGrowth& growth, Rng& rng) {
  return Builder(X, gradients, hessians, growth, {newton_score, newton_leaf}, rng).build(rows);
}

nlohmann::json to_json(const Tree& tree) {
  nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                 left = nlohmann::json::array(), right = nlohmann::json::array(), value = nlohmann::json::array(),
                 cover = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    cover.push_back(n.cover);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"cover", cover}};
}

Tree tree_from_json(const nlohmann::json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const auto cover = j.at("cover").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
      cover.size() != n) {
    throw Error("learn", "malformed tree arrays");
  }
  Tree t;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0) {
      const auto l = static_cast<std::size_t>(left[i]), r = static_cast<std::size_t>(right[i]);
      if (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) || l >= n || r >= n) {
        throw Error("learn", "malformed tree child index");
      }
    }
    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], cover[i]});
  }
  return t;
}

nlohmann::json to_json(const TreeGrowth& g) {
  return {{"max_depth", g.max_depth},
          {"min_samples_leaf", g.min_samples_leaf},
          {"min_samples_split", g.min_samples_split},
          {"max_features", g.max_features}};
}

TreeGrowth growth_from_json(const nlohmann::json& j, const TreeGrowth& d) {
  TreeGrowth g;
  g.max_depth = j.value("max_depth", d.max_depth);
  g.min_samples_leaf = j.value("min_samples_leaf", d.min_samples_leaf);
  g.min_samples_split = j.value("min_samples_split", d.min_samples_split);
  g.max_features = j.value("max_features", d.max_features);
  return g;
}

}  // namespace patchclf
