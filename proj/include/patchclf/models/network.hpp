#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/math.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

/// Fully connected layer: out = W in + b, samples stored as columns.
struct Dense {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;

  /// He-uniform initialization for rectified inputs.
  static Dense init(Eigen::Index in, Eigen::Index out, Rng& rng);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& in) const { return (W * in).colwise() + b; }
  Eigen::Index parameter_count() const { return W.size() + b.size(); }
};

Eigen::VectorXd pack(const std::vector<Dense>& layers);
void unpack(const Eigen::VectorXd& flat, std::vector<Dense>& layers);

/// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  Eigen::VectorXd m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Rectified hidden layers followed by one sigmoid output unit. The last
/// entry of `layers` is the output layer.
struct Mlp {
  std::vector<Dense> layers;

  /// Output margins for inputs stored as columns.
  Eigen::VectorXd margins(const Eigen::MatrixXd& inputs) const;

  /// Weighted mean cross-entropy; `grads` receives dLoss/dparam in the
  /// same layout as `layers` when non-null.
  double loss_and_gradient(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                           std::vector<Dense>* grads) const;

  /// Backward pass from dLoss/dmargin; returns dLoss/dinputs.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& inputs, const Eigen::RowVectorXd& dmargin,
                           std::vector<Dense>& grads) const;
};

struct NetworkConfig {
  std::vector<int> hidden{64};
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
};

struct NetworkModel {
  Standardizer scaler;
  Mlp net;

  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

NetworkModel fit_network(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         const NetworkConfig& config, std::uint64_t seed);

void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

nlohmann::json to_json(const Dense& d);
Dense dense_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkModel& m);
NetworkModel network_from_json(const nlohmann::json& j);

/// Shuffled minibatch index lists for one epoch.
std::vector<std::vector<Eigen::Index>> minibatches(Eigen::Index n, int batch_size, Rng& rng);

}  // namespace patchclf
