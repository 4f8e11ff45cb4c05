#include "patchclf/models/network.hpp"

#include <cmath>
#include <numeric>

#include "patchclf/eigen_json.hpp"
#include "patchclf/error.hpp"

namespace patchclf {

Dense Dense::init(Eigen::Index in, Eigen::Index out, Rng& rng) {
  Dense d;
  d.W.resize(out, in);
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<Eigen::Index>(in, 1)));
  for (Eigen::Index c = 0; c < in; ++c) {
    for (Eigen::Index r = 0; r < out; ++r) d.W(r, c) = uniform(rng, -limit, limit);
  }
  d.b = Eigen::VectorXd::Zero(out);
  return d;
}

Eigen::VectorXd pack(const std::vector<Dense>& layers) {
  Eigen::Index size = 0;
  for (const auto& l : layers) size += l.parameter_count();
  Eigen::VectorXd flat(size);
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    flat.segment(k, l.W.size()) = l.W.reshaped();
    k += l.W.size();
    flat.segment(k, l.b.size()) = l.b;
    k += l.b.size();
  }
  return flat;
}

void unpack(const Eigen::VectorXd& flat, std::vector<Dense>& layers) {
  Eigen::Index k = 0;
  for (auto& l : layers) {
    l.W.reshaped() = flat.segment(k, l.W.size());
    k += l.W.size();
    l.b = flat.segment(k, l.b.size());
    k += l.b.size();
  }
  if (k != flat.size()) throw Error("learn", "parameter vector size mismatch");
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

namespace {

// Pre-activations per layer (the last one is the output margin row).
std::vector<Eigen::MatrixXd> forward_all(const Mlp& net, const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> pre;
  pre.reserve(net.layers.size());
  Eigen::MatrixXd act = inputs;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    pre.push_back(net.layers[l].forward(act));
    if (l + 1 < net.layers.size()) act = pre.back().cwiseMax(0.0);
  }
  return pre;
}

}  // namespace

Eigen::VectorXd Mlp::margins(const Eigen::MatrixXd& inputs) const {
  return forward_all(*this, inputs).back().row(0).transpose();
}

Eigen::MatrixXd Mlp::backward(const Eigen::MatrixXd& inputs, const Eigen::RowVectorXd& dmargin,
                              std::vector<Dense>& grads) const {
  const auto pre = forward_all(*this, inputs);
  grads.resize(layers.size());
  Eigen::MatrixXd delta = dmargin;  // dLoss / d(pre-activation) of the current layer
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Eigen::MatrixXd input = l == 0 ? inputs : Eigen::MatrixXd(pre[l - 1].cwiseMax(0.0));
    grads[l].W = delta * input.transpose();
    grads[l].b = delta.rowwise().sum();
    Eigen::MatrixXd dinput = layers[l].W.transpose() * delta;
    if (l == 0) return dinput;
    delta = dinput.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return {};
}

double Mlp::loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                              std::vector<Dense>* grads) const {
  const Eigen::VectorXd z = margins(inputs);
  const double total = weights.sum();
  double loss = 0.0;
  Eigen::RowVectorXd dz(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += weights(i) * log_loss_from_margin(z(i), y(i));
    dz(i) = weights(i) * (sigmoid(z(i)) - y(i)) / total;
  }
  if (grads) backward(inputs, dz, *grads);
  return loss / total;
}

double NetworkModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::MatrixXd input = scaler.apply_row(x);
  return sigmoid(net.margins(input)(0));
}

std::vector<std::vector<Eigen::Index>> minibatches(Eigen::Index n, int batch_size, Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  shuffle(order.begin(), order.end(), rng);
  const auto bs = static_cast<std::size_t>(std::max(1, batch_size));
  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t s = 0; s < order.size(); s += bs) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), s + bs)));
  }
  return batches;
}

NetworkModel fit_network(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         const NetworkConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  NetworkModel model;
  model.scaler = Standardizer::fit(X, weights);
  const Eigen::MatrixXd Z = model.scaler.apply(X).transpose();  // features x samples

  Eigen::Index in = X.cols();
  for (int width : config.hidden) {
    if (width < 1) throw Error("learn", "hidden layer width must be positive");
    model.net.layers.push_back(Dense::init(in, width, rng));
    in = width;
  }
  model.net.layers.push_back(Dense::init(in, 1, rng));

  Eigen::VectorXd params = pack(model.net.layers);
  Adam adam(params.size(), config.learning_rate);
  std::vector<Dense> grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : minibatches(X.rows(), config.batch_size, rng)) {
      const auto b = static_cast<Eigen::Index>(batch.size());
      Eigen::MatrixXd inputs(Z.rows(), b);
      Eigen::VectorXd yb(b), wb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto r = batch[static_cast<std::size_t>(i)];
        inputs.col(i) = Z.col(r);
        yb(i) = y(r);
        wb(i) = weights(r);
      }
      const double loss = model.net.loss_and_gradient(inputs, yb, wb, &grads);
      if (!std::isfinite(loss)) throw Error("learn", "network loss is not finite", "lower the learning rate");
      adam.step(params, pack(grads));
      unpack(params, model.net.layers);
    }
  }
  return model;
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"hidden", c.hidden}, {"epochs", c.epochs}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  const NetworkConfig d;
  c.hidden = j.value("hidden", d.hidden);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
}

nlohmann::json to_json(const Dense& d) { return {{"W", matrix_to_json(d.W)}, {"b", vector_to_json(d.b)}}; }

Dense dense_from_json(const nlohmann::json& j) {
  Dense d{matrix_from_json(j.at("W")), vector_from_json(j.at("b"))};
  if (d.W.rows() != d.b.size()) throw Error("learn", "dense layer shape mismatch");
  return d;
}

nlohmann::json to_json(const Standardizer& s) {
  return {{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("mean")), vector_from_json(j.at("scale"))};
}

nlohmann::json to_json(const NetworkModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.net.layers) layers.push_back(to_json(l));
  return {{"scaler", to_json(m.scaler)}, {"layers", layers}};
}

NetworkModel network_from_json(const nlohmann::json& j) {
  NetworkModel m;
  m.scaler = standardizer_from_json(j.at("scaler"));
  for (const auto& l : j.at("layers")) m.net.layers.push_back(dense_from_json(l));
  if (m.net.layers.empty() || m.net.layers.back().W.rows() != 1) throw Error("learn", "network must end in one unit");
  return m;
}

}  // namespace patchclf
