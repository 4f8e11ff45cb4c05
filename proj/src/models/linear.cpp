#include "patchclf/models/linear.hpp"

#include <cmath>
#include <numbers>

#include "patchclf/eigen_json.hpp"
#include "patchclf/error.hpp"
#include "patchclf/math.hpp"

namespace patchclf {

double LogisticModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const { return sigmoid(margin(x)); }

LossGradient logistic_loss_gradient(const LogisticModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, double l2) {
  const double total = weights.sum();
  const Eigen::VectorXd z = (X * model.weights).array() + model.bias;
  LossGradient out;
  Eigen::VectorXd residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += weights(i) * log_loss_from_margin(z(i), y(i));
    residual(i) = weights(i) * (sigmoid(z(i)) - y(i)) / total;
  }
  out.loss = loss / total + 0.5 * l2 * model.weights.squaredNorm();
  out.grad_w = X.transpose() * residual + l2 * model.weights;
  out.grad_b = residual.sum();
  return out;
}

namespace {

// Largest eigenvalue of Z^T W Z / sum(W) by power iteration.
double top_eigenvalue(const Eigen::MatrixXd& Z, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(Z.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = Z.transpose() * (weights.array() * (Z * v).array()).matrix() / total;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-9 * std::abs(next)) return norm;
    lambda = next;
  }
  return lambda;
}

}  // namespace

LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                           const LogisticConfig& config) {
  const auto scaler = Standardizer::fit(X, weights);
  const Eigen::MatrixXd Z = scaler.apply(X);
  // Bias direction included: the intercept column has unit second moment.
  const double lipschitz = 0.25 * (top_eigenvalue(Z, weights) + 1.0) + config.l2;
  const double step = config.step_scale / lipschitz;

  LogisticModel m{Eigen::VectorXd::Zero(X.cols()), 0.0};
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto g = logistic_loss_gradient(m, Z, y, weights, config.l2);
    if (!std::isfinite(g.loss)) throw Error("learn", "logistic regression loss is not finite");
    const double gnorm = std::sqrt(g.grad_w.squaredNorm() + g.grad_b * g.grad_b);
    if (gnorm < config.tolerance) break;
    m.weights -= step * g.grad_w;
    m.bias -= step * g.grad_b;
  }
  // Back to raw units: w_raw = w / s, b_raw = b - sum(w * mu / s).
  LogisticModel raw;
  raw.weights = m.weights.cwiseQuotient(scaler.scale);
  raw.bias = m.bias - raw.weights.dot(scaler.mean);
  return raw;
}

double NaiveBayesModel::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double ll[2];
  for (int c = 0; c < 2; ++c) {
    const Eigen::ArrayXd var = variance.row(c).transpose().array();
    const Eigen::ArrayXd diff = x.array() - mean.row(c).transpose().array();
    ll[c] = log_prior(c) - 0.5 * ((2.0 * std::numbers::pi * var).log() + diff.square() / var).sum();
  }
  return sigmoid(ll[1] - ll[0]);
}

NaiveBayesModel fit_naive_bayes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                                const NaiveBayesConfig& config) {
  const auto p = X.cols();
  NaiveBayesModel m;
  m.mean.resize(2, p);
  m.variance.resize(2, p);
  const Eigen::VectorXd w_pos = weights.cwiseProduct(y);
  const Eigen::VectorXd w_neg = weights - w_pos;
  const Eigen::VectorXd* class_weights[2] = {&w_neg, &w_pos};

  const auto all = Standardizer::fit(X, weights);
  const double max_var = all.scale.array().square().maxCoeff();
  const double epsilon = config.var_smoothing * (max_var > 0 ? max_var : 1.0);
  const double total = weights.sum();
  for (int c = 0; c < 2; ++c) {
    const auto& w = *class_weights[c];
    const double wc = w.sum();
    if (wc <= 0) throw Error("learn", "naive Bayes needs both classes");
    m.log_prior(c) = std::log(wc / total);
    m.mean.row(c) = (X.transpose() * w / wc).transpose();
    for (Eigen::Index f = 0; f < p; ++f) {
      const double var = ((X.col(f).array() - m.mean(c, f)).square() * w.array()).sum() / wc;
      m.variance(c, f) = var + epsilon;
    }
  }
  return m;
}

void to_json(nlohmann::json& j, const LogisticConfig& c) {
  j = {{"l2", c.l2}, {"step_scale", c.step_scale}, {"max_epochs", c.max_epochs}, {"tolerance", c.tolerance}};
}

void from_json(const nlohmann::json& j, LogisticConfig& c) {
  const LogisticConfig d;
  c.l2 = j.value("l2", d.l2);
  c.step_scale = j.value("step_scale", d.step_scale);
  c.max_epochs = j.value("max_epochs", d.max_epochs);
  c.tolerance = j.value("tolerance", d.tolerance);
}

void to_json(nlohmann::json& j, const NaiveBayesConfig& c) { j = {{"var_smoothing", c.var_smoothing}}; }

void from_json(const nlohmann::json& j, NaiveBayesConfig& c) {
  c.var_smoothing = j.value("var_smoothing", NaiveBayesConfig{}.var_smoothing);
}

nlohmann::json to_json(const LogisticModel& m) { return {{"weights", vector_to_json(m.weights)}, {"bias", m.bias}}; }

LogisticModel logistic_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("weights")), j.at("bias").get<double>()};
}

nlohmann::json to_json(const NaiveBayesModel& m) {
  return {{"log_prior", vector_to_json(m.log_prior)},
          {"mean", matrix_to_json(m.mean)},
          {"variance", matrix_to_json(m.variance)}};
}

NaiveBayesModel naive_bayes_from_json(const nlohmann::json& j) {
  NaiveBayesModel m;
  const auto prior = vector_from_json(j.at("log_prior"));
  if (prior.size() != 2) throw Error("learn", "naive Bayes prior must have two entries");
  m.log_prior = prior;
  m.mean = matrix_from_json(j.at("mean"));
  m.variance = matrix_from_json(j.at("variance"));
  if (m.mean.rows() != 2 || m.variance.rows() != 2 || m.mean.cols() != m.variance.cols()) {
    throw Error("learn", "naive Bayes parameter shapes disagree");
  }
  return m;
}

}  // namespace patchclf
