#include "patchclf/model.hpp"

#include <algorithm>
#include <fstream>

#include "patchclf/error.hpp"

namespace patchclf {

namespace {
constexpr int kModelVersion = 1;
constexpr std::string_view kModelFormat = "patchclf.model";
}  // namespace

std::string_view short_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::NaiveBayes: return "nb";
    case ModelKind::DecisionTree: return "dt";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::GradientBoostedTrees: return "gbt";
    case ModelKind::FeedForwardNet: return "dnn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::LogisticRegression, ModelKind::NaiveBayes, ModelKind::DecisionTree, ModelKind::RandomForest,
                 ModelKind::GradientBoostedTrees, ModelKind::FeedForwardNet}) {
    if (text == short_name(k)) return k;
  }
  throw Error("learn", "unknown learner '" + std::string(text) + "'", "use lr|nb|dt|rf|gbt|dnn");
}

nlohmann::json LearnerConfig::for_kind(ModelKind kind) const {
  nlohmann::json j;
  switch (kind) {
    case ModelKind::LogisticRegression: j = logistic; break;
    case ModelKind::NaiveBayes: j = naive_bayes; break;
    case ModelKind::DecisionTree: j = decision_tree; break;
    case ModelKind::RandomForest: j = random_forest; break;
    case ModelKind::GradientBoostedTrees: j = boosting; break;
    case ModelKind::FeedForwardNet: j = network; break;
  }
  j["balance_classes"] = balance_classes;
  return j;
}

void to_json(nlohmann::json& j, const LearnerConfig& c) {
  j = {{"lr", c.logistic},     {"nb", c.naive_bayes}, {"dt", c.decision_tree},
       {"rf", c.random_forest}, {"gbt", c.boosting},   {"dnn", c.network},
       {"balance_classes", c.balance_classes}};
}

void from_json(const nlohmann::json& j, LearnerConfig& c) {
  if (j.contains("lr")) c.logistic = j["lr"].get<LogisticConfig>();
  if (j.contains("nb")) c.naive_bayes = j["nb"].get<NaiveBayesConfig>();
  if (j.contains("dt")) c.decision_tree = j["dt"].get<DecisionTreeConfig>();
  if (j.contains("rf")) c.random_forest = j["rf"].get<RandomForestConfig>();
  if (j.contains("gbt")) c.boosting = j["gbt"].get<BoostingConfig>();
  if (j.contains("dnn")) c.network = j["dnn"].get<NetworkConfig>();
  c.balance_classes = j.value("balance_classes", c.balance_classes);
}

TrainedModel::TrainedModel(ModelKind kind, Parameters params, Eigen::Index feature_count,
                           nlohmann::json training_config, std::uint64_t seed)
    : kind_(kind),
      params_(std::move(params)),
      feature_count_(feature_count),
      training_config_(std::move(training_config)),
      seed_(seed) {}

double TrainedModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != feature_count_) {
    throw Error("learn", "expected " + std::to_string(feature_count_) + " features, got " + std::to_string(x.size()));
  }
  const double p = std::visit([&](const auto& m) { return m.predict_proba(x); }, params_);
  return std::clamp(p, 0.0, 1.0);
}

Eigen::VectorXd TrainedModel::predict_batch(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd row = X.row(i).transpose();
    out(i) = predict_proba(row);
  }
  return out;
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json params;
  switch (kind_) {
    case ModelKind::LogisticRegression: params = patchclf::to_json(as<LogisticModel>()); break;
    case ModelKind::NaiveBayes: params = patchclf::to_json(as<NaiveBayesModel>()); break;
    case ModelKind::DecisionTree: params = {{"tree", patchclf::to_json(as<DecisionTreeModel>().tree)}}; break;
    case ModelKind::RandomForest: params = patchclf::to_json(as<RandomForestModel>()); break;
    case ModelKind::GradientBoostedTrees: params = patchclf::to_json(as<BoostedModel>()); break;
    case ModelKind::FeedForwardNet: params = patchclf::to_json(as<NetworkModel>()); break;
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"kind", short_name(kind_)},
          {"feature_count", feature_count_},
          {"seed", seed_},
          {"training_config", training_config_},
          {"parameters", params}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != kModelFormat) throw Error("learn", "not a patchclf model file");
  if (j.value("version", -1) != kModelVersion) {
    throw Error("learn", "unsupported model version " + j.value("version", nlohmann::json(-1)).dump());
  }
  const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
  const auto& p = j.at("parameters");
  const auto features = j.at("feature_count").get<Eigen::Index>();
  Parameters params;
  switch (kind) {
    case ModelKind::LogisticRegression: {
      auto m = logistic_from_json(p);
      if (m.weights.size() != features) throw Error("learn", "weight count does not match feature_count");
      params = std::move(m);
      break;
    }
    case ModelKind::NaiveBayes: {
      auto m = naive_bayes_from_json(p);
      if (m.mean.cols() != features) throw Error("learn", "parameter width does not match feature_count");
      params = std::move(m);
      break;
    }
    case ModelKind::DecisionTree: params = DecisionTreeModel{tree_from_json(p.at("tree"))}; break;
    case ModelKind::RandomForest: params = forest_from_json(p); break;
    case ModelKind::GradientBoostedTrees: params = boosted_from_json(p); break;
    case ModelKind::FeedForwardNet: {
      auto m = network_from_json(p);
      if (m.net.layers.front().W.cols() != features) throw Error("learn", "input width does not match feature_count");
      params = std::move(m);
      break;
    }
  }
  return TrainedModel(kind, std::move(params), features, j.value("training_config", nlohmann::json::object()),
                      j.at("seed").get<std::uint64_t>());
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("learn", "cannot write " + path.string());
  out << to_json().dump() << '\n';
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("learn", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("learn", "model file " + path.string() + " does not parse: " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("learn", "model file " + path.string() + " is malformed: " + e.what());
  }
}

Eigen::VectorXd sample_weights(const Eigen::VectorXi& y, bool balance) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
  if (!balance) return w;
  const auto positives = static_cast<double>((y.array() == 1).count());
  const auto negatives = static_cast<double>(y.size()) - positives;
  const auto n = static_cast<double>(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) w(i) = y(i) == 1 ? n / (2.0 * positives) : n / (2.0 * negatives);
  return w;
}

TrainedModel train(ModelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const LearnerConfig& config,
                   std::uint64_t seed) {
  if (X.rows() < 2) throw Error("learn", "need at least two training rows");
  if (X.rows() != y.size()) throw Error("learn", "label count does not match row count");
  if (!X.allFinite()) throw Error("learn", "training features contain non-finite values");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0 && y(i) != 1) throw Error("learn", "training labels must be 0 or 1");
  }
  const auto positives = (y.array() == 1).count();
  if (positives == 0 || positives == y.size()) {
    throw Error("learn", "training data contains a single class", "both correct and incorrect patches are required");
  }
  const Eigen::VectorXd yd = y.cast<double>();
  const Eigen::VectorXd w = sample_weights(y, config.balance_classes);

  TrainedModel::Parameters params;
  switch (kind) {
    case ModelKind::LogisticRegression: params = fit_logistic(X, yd, w, config.logistic); break;
    case ModelKind::NaiveBayes: params = fit_naive_bayes(X, yd, w, config.naive_bayes); break;
    case ModelKind::DecisionTree: params = fit_decision_tree(X, yd, w, config.decision_tree, seed); break;
    case ModelKind::RandomForest: params = fit_random_forest(X, yd, w, config.random_forest, seed, config.workers); break;
    case ModelKind::GradientBoostedTrees: params = fit_boosted(X, yd, w, config.boosting, seed); break;
    case ModelKind::FeedForwardNet: params = fit_network(X, yd, w, config.network, seed); break;
  }
  return TrainedModel(kind, std::move(params), X.cols(), config.for_kind(kind), seed);
}

TrainedModel train(ModelKind kind, const FeatureMatrix& data, const LearnerConfig& config, std::uint64_t seed) {
  data.validate();
  return train(kind, data.X, data.y, config, seed);
}

}  // namespace patchclf
