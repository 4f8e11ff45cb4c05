#include "patchclf/combine.hpp"

#include <cmath>
#include <unordered_map>

#include "patchclf/error.hpp"

namespace patchclf {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::EnsembleAverage: return "ensemble";
    case Strategy::NaiveConcat: return "concat";
    case Strategy::DeepFusion: return "fusion";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  for (auto s : {Strategy::EnsembleAverage, Strategy::NaiveConcat, Strategy::DeepFusion}) {
    if (text == to_string(s)) return s;
  }
  throw Error("combine", "unknown strategy '" + std::string(text) + "'", "use ensemble|concat|fusion");
}

double ensemble_average(const TrainedModel& learned, const TrainedModel& engineered,
                        const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                        const Eigen::Ref<const Eigen::VectorXd>& engineered_x) {
  return average_probability(learned.predict_proba(learned_x), engineered.predict_proba(engineered_x));
}

FeatureMatrix naive_concat(const FeatureMatrix& learned, const FeatureMatrix& engineered) {
  std::unordered_map<std::string, Eigen::Index> position;
  for (std::size_t i = 0; i < engineered.patch_ids.size(); ++i) {
    position.emplace(engineered.patch_ids[i], static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::Index> order;
  order.reserve(learned.patch_ids.size());
  for (const auto& id : learned.patch_ids) {
    const auto it = position.find(id);
    if (it == position.end()) throw Error("combine", "patch " + id + " has no engineered features");
    order.push_back(it->second);
  }
  if (engineered.rows() != learned.rows()) {
    std::unordered_map<std::string, bool> seen;
    for (const auto& id : learned.patch_ids) seen[id] = true;
    for (const auto& id : engineered.patch_ids) {
      if (!seen.count(id)) throw Error("combine", "patch " + id + " has no learned features");
    }
  }
  return concat_columns(learned, engineered.select_rows(order));
}

Eigen::VectorXd naive_concat(const Eigen::Ref<const Eigen::VectorXd>& learned,
                             const Eigen::Ref<const Eigen::VectorXd>& engineered) {
  Eigen::VectorXd out(learned.size() + engineered.size());
  out << learned, engineered;
  return out;
}

void to_json(nlohmann::json& j, const FusionConfig& c) {
  j = {{"learned_width", c.learned_width},
       {"engineered_width", c.engineered_width},
       {"joint_width", c.joint_width},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate}};
}

void from_json(const nlohmann::json& j, FusionConfig& c) {
  const FusionConfig d;
  c.learned_width = j.value("learned_width", d.learned_width);
  c.engineered_width = j.value("engineered_width", d.engineered_width);
  c.joint_width = j.value("joint_width", d.joint_width);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
}

namespace {

struct FusionForward {
  Eigen::MatrixXd learned_pre;
  Eigen::MatrixXd engineered_pre;
  Eigen::MatrixXd joint;  // rectified tower outputs stacked
  Eigen::MatrixXd joint_pre;
  Eigen::RowVectorXd margin;

  Eigen::MatrixXd head_input() const { return joint_pre.size() ? Eigen::MatrixXd(joint_pre.cwiseMax(0.0)) : joint; }
};

FusionForward forward(const FusionNet& net, const Eigen::MatrixXd& learned_in, const Eigen::MatrixXd& engineered_in) {
  FusionForward f;
  f.learned_pre = net.learned.forward(learned_in);
  f.engineered_pre = net.engineered.forward(engineered_in);
  f.joint.resize(f.learned_pre.rows() + f.engineered_pre.rows(), learned_in.cols());
  f.joint << f.learned_pre.cwiseMax(0.0), f.engineered_pre.cwiseMax(0.0);
  if (net.has_joint()) f.joint_pre = net.joint.forward(f.joint);
  f.margin = net.head.forward(f.head_input()).row(0);
  return f;
}

}  // namespace

Eigen::VectorXd FusionNet::margins(const Eigen::MatrixXd& learned_in, const Eigen::MatrixXd& engineered_in) const {
  return forward(*this, learned_in, engineered_in).margin.transpose();
}

double FusionNet::loss_and_gradient(const Eigen::MatrixXd& learned_in, const Eigen::MatrixXd& engineered_in,
                                    const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                                    FusionNet* grads) const {
  const auto f = forward(*this, learned_in, engineered_in);
  const double total = weights.sum();
  double loss = 0.0;
  Eigen::RowVectorXd dz(f.margin.size());
  for (Eigen::Index i = 0; i < dz.size(); ++i) {
    loss += weights(i) * log_loss_from_margin(f.margin(i), y(i));
    dz(i) = weights(i) * (sigmoid(f.margin(i)) - y(i)) / total;
  }
  if (grads) {
    grads->head.W = dz * f.head_input().transpose();
    grads->head.b = dz.rowwise().sum();
    Eigen::MatrixXd djoint = head.W.transpose() * dz;
    if (has_joint()) {
      const Eigen::MatrixXd dpre = djoint.cwiseProduct((f.joint_pre.array() > 0.0).cast<double>().matrix());
      grads->joint.W = dpre * f.joint.transpose();
      grads->joint.b = dpre.rowwise().sum();
      djoint = joint.W.transpose() * dpre;
    } else {
      grads->joint = Dense{};
    }
    const auto hl = f.learned_pre.rows();
    const auto he = f.engineered_pre.rows();
    const Eigen::MatrixXd dl =
        djoint.topRows(hl).cwiseProduct((f.learned_pre.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd de =
        djoint.bottomRows(he).cwiseProduct((f.engineered_pre.array() > 0.0).cast<double>().matrix());
    grads->learned.W = dl * learned_in.transpose();
    grads->learned.b = dl.rowwise().sum();
    grads->engineered.W = de * engineered_in.transpose();
    grads->engineered.b = de.rowwise().sum();
  }
  return loss / total;
}

void FusionNet::set_layers(const std::vector<Dense>& l) {
  if (l.size() != 4) throw Error("combine", "fusion network needs four layers");
  learned = l[0];
  engineered = l[1];
  joint = l[2];
  head = l[3];
}

double FusionModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                                  const Eigen::Ref<const Eigen::VectorXd>& engineered_x) const {
  if (learned_x.size() != learned_scaler.mean.size() || engineered_x.size() != engineered_scaler.mean.size()) {
    throw Error("combine", "fusion input widths do not match the trained towers");
  }
  const Eigen::MatrixXd l = learned_scaler.apply_row(learned_x);
  const Eigen::MatrixXd e = engineered_scaler.apply_row(engineered_x);
  return sigmoid(net.margins(l, e)(0));
}

FusionModel deep_fusion_train(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& engineered,
                              const Eigen::VectorXi& y, const FusionConfig& config, std::uint64_t seed) {
  if (learned.rows() != engineered.rows() || learned.rows() != y.size()) {
    throw Error("combine", "fusion inputs are not row-aligned");
  }
  if (learned.rows() < 2) throw Error("combine", "need at least two training rows");
  const auto positives = (y.array() == 1).count();
  if (positives == 0 || positives == y.size()) {
    throw Error("combine", "training data contains a single class", "both correct and incorrect patches are required");
  }
  if (!learned.allFinite() || !engineered.allFinite()) throw Error("combine", "training features contain non-finite values");
  if (config.learned_width < 1 || config.engineered_width < 1 || config.joint_width < 0) {
    throw Error("combine", "tower widths must be positive");
  }

  Rng rng(seed);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(y.size());
  const Eigen::VectorXd yd = y.cast<double>();
  FusionModel model;
  model.learned_scaler = Standardizer::fit(learned, w);
  model.engineered_scaler = Standardizer::fit(engineered, w);
  const Eigen::MatrixXd L = model.learned_scaler.apply(learned).transpose();
  const Eigen::MatrixXd E = model.engineered_scaler.apply(engineered).transpose();

  model.net.learned = Dense::init(learned.cols(), config.learned_width, rng);
  model.net.engineered = Dense::init(engineered.cols(), config.engineered_width, rng);
  const int stacked = config.learned_width + config.engineered_width;
  if (config.joint_width > 0) model.net.joint = Dense::init(stacked, config.joint_width, rng);
  model.net.head = Dense::init(config.joint_width > 0 ? config.joint_width : stacked, 1, rng);

  Eigen::VectorXd params = pack(model.net.layers());
  Adam adam(params.size(), config.learning_rate);
  FusionNet grads;
  std::vector<Dense> layers = model.net.layers();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : minibatches(learned.rows(), config.batch_size, rng)) {
      const auto b = static_cast<Eigen::Index>(batch.size());
      Eigen::MatrixXd lb(L.rows(), b), eb(E.rows(), b);
      Eigen::VectorXd yb(b), wb = Eigen::VectorXd::Ones(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto r = batch[static_cast<std::size_t>(i)];
        lb.col(i) = L.col(r);
        eb.col(i) = E.col(r);
        yb(i) = yd(r);
      }
      const double loss = model.net.loss_and_gradient(lb, eb, yb, wb, &grads);
      if (!std::isfinite(loss)) throw Error("combine", "fusion loss is not finite", "lower the learning rate");
      adam.step(params, pack(grads.layers()));
      unpack(params, layers);
      model.net.set_layers(layers);
    }
  }
  return model;
}

nlohmann::json to_json(const FusionModel& m) {
  return {{"learned_scaler", to_json(m.learned_scaler)},
          {"engineered_scaler", to_json(m.engineered_scaler)},
          {"learned", to_json(m.net.learned)},
          {"engineered", to_json(m.net.engineered)},
          {"joint", m.net.has_joint() ? to_json(m.net.joint) : nlohmann::json(nullptr)},
          {"head", to_json(m.net.head)}};
}

FusionModel fusion_from_json(const nlohmann::json& j) {
  FusionModel m;
  m.learned_scaler = standardizer_from_json(j.at("learned_scaler"));
  m.engineered_scaler = standardizer_from_json(j.at("engineered_scaler"));
  m.net.learned = dense_from_json(j.at("learned"));
  m.net.engineered = dense_from_json(j.at("engineered"));
  if (!j.value("joint", nlohmann::json(nullptr)).is_null()) m.net.joint = dense_from_json(j["joint"]);
  m.net.head = dense_from_json(j.at("head"));
  return m;
}

double CombinedModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& learned_x,
                                    const Eigen::Ref<const Eigen::VectorXd>& engineered_x) const {
  switch (strategy) {
    case Strategy::EnsembleAverage: return ensemble_average(members.at(0), members.at(1), learned_x, engineered_x);
    case Strategy::NaiveConcat: {
      const Eigen::VectorXd x = naive_concat(learned_x, engineered_x);
      return members.at(0).predict_proba(x);
    }
    case Strategy::DeepFusion: return fusion->predict_proba(learned_x, engineered_x);
  }
  return 0.5;
}

Eigen::VectorXd CombinedModel::predict_batch(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& engineered) const {
  if (learned.rows() != engineered.rows()) throw Error("combine", "feature sets have different row counts");
  Eigen::VectorXd out(learned.rows());
  for (Eigen::Index i = 0; i < learned.rows(); ++i) {
    const Eigen::VectorXd l = learned.row(i).transpose();
    const Eigen::VectorXd e = engineered.row(i).transpose();
    out(i) = predict_proba(l, e);
  }
  return out;
}

nlohmann::json CombinedModel::to_json() const {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& t : members) m.push_back(t.to_json());
  nlohmann::json j = {{"format", "patchclf.combined"},
                      {"version", 1},
                      {"strategy", patchclf::to_string(strategy)},
                      {"learned_width", learned_width},
                      {"engineered_width", engineered_width},
                      {"members", m}};
  if (fusion) j["fusion"] = patchclf::to_json(*fusion);
  return j;
}

CombinedModel CombinedModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "patchclf.combined" || j.value("version", -1) != 1) {
    throw Error("combine", "not a supported combined model file");
  }
  CombinedModel c;
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.learned_width = j.at("learned_width").get<Eigen::Index>();
  c.engineered_width = j.at("engineered_width").get<Eigen::Index>();
  for (const auto& m : j.at("members")) c.members.push_back(TrainedModel::from_json(m));
  if (j.contains("fusion")) c.fusion = fusion_from_json(j["fusion"]);
  const std::size_t expected = c.strategy == Strategy::EnsembleAverage ? 2 : c.strategy == Strategy::NaiveConcat ? 1 : 0;
  if (c.members.size() != expected || (c.strategy == Strategy::DeepFusion) != c.fusion.has_value()) {
    throw Error("combine", "combined model members do not match its strategy");
  }
  return c;
}

CombinedModel train_combined(Strategy strategy, ModelKind kind, const FeatureMatrix& learned,
                             const FeatureMatrix& engineered, const LearnerConfig& learner,
                             const FusionConfig& fusion, std::uint64_t seed) {
  CombinedModel c;
  c.strategy = strategy;
  c.learned_width = learned.cols();
  c.engineered_width = engineered.cols();
  switch (strategy) {
    case Strategy::EnsembleAverage:
      c.members.push_back(train(kind, learned.X, learned.y, learner, mix_seed(seed, 0)));
      c.members.push_back(train(kind, engineered.X, engineered.y, learner, mix_seed(seed, 1)));
      break;
    case Strategy::NaiveConcat: {
      const auto joint = naive_concat(learned, engineered);
      c.members.push_back(train(kind, joint.X, joint.y, learner, seed));
      break;
    }
    case Strategy::DeepFusion:
      c.fusion = deep_fusion_train(learned.X, engineered.X, learned.y, fusion, seed);
      break;
  }
  return c;
}

}  // namespace patchclf
