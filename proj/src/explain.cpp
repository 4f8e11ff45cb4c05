#include "patchclf/explain.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "patchclf/error.hpp"
#include "patchclf/features.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

std::vector<double> split_fractions(const Tree& tree, const Eigen::MatrixXd& background) {
  const auto& nodes = tree.nodes;
  std::vector<double> count(nodes.size(), 0.0);
  for (Eigen::Index r = 0; r < background.rows(); ++r) {
    int i = 0;
    for (;;) {
      count[static_cast<std::size_t>(i)] += 1.0;
      const auto& n = nodes[static_cast<std::size_t>(i)];
      if (n.is_leaf()) break;
      i = background(r, n.feature) <= n.threshold ? n.left : n.right;
    }
  }
  std::vector<double> frac(nodes.size(), 1.0);
  for (const auto& n : nodes) {
    if (n.is_leaf()) continue;
    const auto l = static_cast<std::size_t>(n.left);
    const auto r = static_cast<std::size_t>(n.right);
    if (count[l] + count[r] > 0) {
      frac[l] = count[l] / (count[l] + count[r]);
      frac[r] = count[r] / (count[l] + count[r]);
    } else if (nodes[l].cover + nodes[r].cover > 0) {
      frac[l] = nodes[l].cover / (nodes[l].cover + nodes[r].cover);
      frac[r] = nodes[r].cover / (nodes[l].cover + nodes[r].cover);
    } else {
      frac[l] = frac[r] = 0.5;
    }
  }
  return frac;
}

double expected_value(const Tree& tree, const std::vector<double>& fractions) {
  double sum = 0.0;
  std::vector<std::pair<int, double>> stack{{0, 1.0}};
  while (!stack.empty()) {
    const auto [i, w] = stack.back();
    stack.pop_back();
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      sum += w * n.value;
      continue;
    }
    stack.emplace_back(n.left, w * fractions[static_cast<std::size_t>(n.left)]);
    stack.emplace_back(n.right, w * fractions[static_cast<std::size_t>(n.right)]);
  }
  return sum;
}

namespace {

struct PathElement {
  int feature = -1;
  double zero = 0.0;
  double one = 0.0;
  double weight = 0.0;
};

void extend(PathElement* path, int depth, double zero, double one, int feature) {
  path[depth] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind(PathElement* path, int depth, int index) {
  const double one = path[index].one;
  const double zero = path[index].zero;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].weight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero = path[i + 1].zero;
    path[i].one = path[i + 1].one;
  }
}

double unwound_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one;
  const double zero = path[index].zero;
  double next = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * ((depth - i) / static_cast<double>(depth + 1));
    } else if (zero != 0.0) {
      total += (path[i].weight / zero) / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

struct Walker {
  const Tree& tree;
  const std::vector<double>& frac;
  const Eigen::Ref<const Eigen::VectorXd>& x;
  double scale;
  Eigen::Ref<Eigen::VectorXd>& phi;
  int condition;
  int condition_feature;

  void recurse(int node, PathElement* parent_path, int depth, double parent_zero, double parent_one,
               int parent_feature, double condition_fraction) {
    if (condition_fraction == 0.0) return;
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    if (condition == 0 || condition_feature != parent_feature) {
      extend(path, depth, parent_zero, parent_one, parent_feature);
    }
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_sum(path, depth, i);
        const auto& el = path[i];
        phi(el.feature) += w * (el.one - el.zero) * n.value * scale * condition_fraction;
      }
      return;
    }
    const int hot = x(n.feature) <= n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    const double hot_zero = frac[static_cast<std::size_t>(hot)];
    const double cold_zero = frac[static_cast<std::size_t>(cold)];
    double incoming_zero = 1.0;
    double incoming_one = 1.0;

    int index = 0;
    for (; index <= depth; ++index) {
      if (path[index].feature == n.feature) break;
    }
    if (index != depth + 1) {
      incoming_zero = path[index].zero;
      incoming_one = path[index].one;
      unwind(path, depth, index);
      depth -= 1;
    }

    double hot_condition = condition_fraction;
    double cold_condition = condition_fraction;
    if (condition > 0 && n.feature == condition_feature) {
      cold_condition = 0.0;
      depth -= 1;
    } else if (condition < 0 && n.feature == condition_feature) {
      hot_condition *= hot_zero;
      cold_condition *= cold_zero;
      depth -= 1;
    }
    if (hot_zero * incoming_zero != 0.0 || incoming_one != 0.0) {
      recurse(hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature, hot_condition);
    }
    if (cold_zero * incoming_zero != 0.0) {
      recurse(cold, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature, cold_condition);
    }
  }
};

}  // namespace

void tree_shap(const Tree& tree, const std::vector<double>& fractions, const Eigen::Ref<const Eigen::VectorXd>& x,
               double scale, Eigen::Ref<Eigen::VectorXd> phi, int condition, int condition_feature) {
  const int max_depth = tree.depth() + 2;
  std::vector<PathElement> storage(static_cast<std::size_t>((max_depth * (max_depth + 1)) / 2 + max_depth + 1));
  Walker w{tree, fractions, x, scale, phi, condition, condition_feature};
  w.recurse(0, storage.data(), 0, 1.0, 1.0, -1, 1.0);
}

Explainer::Explainer(const TrainedModel& model, const Eigen::MatrixXd& background)
    : model_(&model), features_(model.feature_count()) {
  if (background.rows() == 0) throw Error("explain", "background set is empty");
  if (background.cols() != features_) throw Error("explain", "background width does not match the model");
  background_mean_ = background.colwise().mean().transpose();
  auto add = [&](const Tree& t, double scale) { members_.push_back({&t, scale, split_fractions(t, background)}); };
  switch (model.kind()) {
    case ModelKind::DecisionTree:
      add(model.as<DecisionTreeModel>().tree, 1.0);
      space_ = "probability";
      break;
    case ModelKind::RandomForest: {
      const auto& trees = model.as<RandomForestModel>().trees;
      for (const auto& t : trees) add(t, 1.0 / static_cast<double>(trees.size()));
      space_ = "probability";
      break;
    }
    case ModelKind::GradientBoostedTrees: {
      const auto& m = model.as<BoostedModel>();
      for (const auto& t : m.trees) add(t, 1.0);
      offset_ = m.init;
      space_ = "margin";
      break;
    }
    case ModelKind::LogisticRegression: {
      const auto& m = model.as<LogisticModel>();
      linear_ = true;
      base_ = m.bias + m.weights.dot(background_mean_);
      space_ = "margin";
      return;
    }
    default:
      throw Error("explain", "no exact explainer for learner '" + std::string(short_name(model.kind())) + "'",
                  "explain a dt, rf, gbt or lr model");
  }
  base_ = offset_;
  for (const auto& m : members_) base_ += m.scale * expected_value(*m.tree, m.fractions);
}

double Explainer::output(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (linear_) return model_->as<LogisticModel>().margin(x);
  double z = offset_;
  for (const auto& m : members_) z += m.scale * m.tree->predict(x);
  return z;
}

Eigen::VectorXd Explainer::conditional(const Eigen::Ref<const Eigen::VectorXd>& x, int condition, int feature) const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(features_);
  for (const auto& m : members_) tree_shap(*m.tree, m.fractions, x, m.scale, phi, condition, feature);
  return phi;
}

ShapExplanation Explainer::explain(const Eigen::Ref<const Eigen::VectorXd>& x, const std::string& patch_id) const {
  if (x.size() != features_) throw Error("explain", "instance width does not match the model");
  ShapExplanation e;
  e.patch_id = patch_id;
  e.base_value = base_;
  e.space = space_;
  e.model_output = output(x);
  if (linear_) {
    const auto& w = model_->as<LogisticModel>().weights;
    e.contributions = w.cwiseProduct(x - background_mean_);
  } else {
    e.contributions = conditional(x, 0, -1);
  }
  return e;
}

double Explainer::interaction(const Eigen::Ref<const Eigen::VectorXd>& x, int a, int b) const {
  if (x.size() != features_) throw Error("explain", "instance width does not match the model");
  if (a < 0 || b < 0 || a >= features_ || b >= features_) throw Error("explain", "feature index out of range");
  if (linear_) return 0.0;
  if (a == b) throw Error("explain", "interaction needs two distinct features");
  auto one_way = [&](int i, int j) {
    const Eigen::VectorXd on = conditional(x, 1, j);
    const Eigen::VectorXd off = conditional(x, -1, j);
    return (on(i) - off(i)) / 2.0;
  };
  return (one_way(a, b) + one_way(b, a)) / 2.0;
}

ShapExplanation linear_shap(const LogisticModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::MatrixXd& background) {
  if (background.rows() == 0) throw Error("explain", "background set is empty");
  if (x.size() != model.weights.size() || background.cols() != model.weights.size()) {
    throw Error("explain", "instance width does not match the model");
  }
  const Eigen::VectorXd mean = background.colwise().mean().transpose();
  ShapExplanation e;
  e.base_value = model.bias + model.weights.dot(mean);
  e.contributions = model.weights.cwiseProduct(x - mean);
  e.model_output = model.margin(x);
  e.space = "margin";
  return e;
}

std::vector<RankedFeature> global_importance(const std::vector<ShapExplanation>& explanations,
                                             const std::vector<std::string>& names) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(names.size()));
  for (const auto& e : explanations) {
    if (e.contributions.size() != sum.size()) throw Error("explain", "explanation width does not match names");
    sum += e.contributions.cwiseAbs();
  }
  if (!explanations.empty()) sum /= static_cast<double>(explanations.size());
  std::vector<RankedFeature> ranked;
  for (std::size_t i = 0; i < names.size(); ++i) ranked.push_back({names[i], sum(static_cast<Eigen::Index>(i))});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.name < b.name;
  });
  return ranked;
}

Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& X, Eigen::Index cap, std::uint64_t seed) {
  if (X.rows() <= cap) return X;
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  Rng rng(seed);
  shuffle(rows.begin(), rows.end(), rng);
  rows.resize(static_cast<std::size_t>(cap));
  std::sort(rows.begin(), rows.end());
  return X(rows, Eigen::all);
}

std::string explanations_to_csv(const std::vector<ShapExplanation>& explanations,
                                const std::vector<std::string>& names, const nlohmann::json& provenance) {
  std::ostringstream out;
  if (!provenance.is_null()) out << "# " << provenance.dump() << '\n';
  out << "patch_id,feature_name,contribution\n";
  for (const auto& e : explanations) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << e.patch_id << ',' << names[i] << ',' << format_double(e.contributions(static_cast<Eigen::Index>(i)))
          << '\n';
    }
  }
  return out.str();
}

}  // namespace patchclf
