#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <json.hpp>

namespace patchclf {

struct LogisticConfig {
  double l2 = 1e-3;
  double step_scale = 1.0;  // step = step_scale / L, L the gradient Lipschitz bound
  int max_epochs = 3000;
  double tolerance = 1e-6;  // stop when the gradient norm falls below this
};

/// P(y=1|x) = sigmoid(w.x + b), weights expressed in raw feature units.
struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  template <typename Derived>
  double margin(const Eigen::MatrixBase<Derived>& x) const {
    return weights.dot(x) + bias;
  }
  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;
};

/// Weighted mean cross-entropy plus (l2 / 2)|w|^2, and its exact gradient.
LossGradient logistic_loss_gradient(const LogisticModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, double l2);

/// Full-batch gradient descent on standardized features; the solution is
/// mapped back to raw feature units.
LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                           const LogisticConfig& config);

struct NaiveBayesConfig {
  double var_smoothing = 1e-9;  // fraction of the largest feature variance added to every variance
};

struct NaiveBayesModel {
  Eigen::Vector2d log_prior;
  Eigen::MatrixXd mean;      // 2 x p
  Eigen::MatrixXd variance;  // 2 x p

  double predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

NaiveBayesModel fit_naive_bayes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                                const NaiveBayesConfig& config);

void to_json(nlohmann::json& j, const LogisticConfig& c);
void from_json(const nlohmann::json& j, LogisticConfig& c);
void to_json(nlohmann::json& j, const NaiveBayesConfig& c);
void from_json(const nlohmann::json& j, NaiveBayesConfig& c);

nlohmann::json to_json(const LogisticModel& m);
LogisticModel logistic_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NaiveBayesModel& m);
NaiveBayesModel naive_bayes_from_json(const nlohmann::json& j);

}  // namespace patchclf
