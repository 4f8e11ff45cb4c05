#pragma once

#include <cmath>

#include <Eigen/Core>

namespace patchclf {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Cross-entropy of label y in {0,1} against margin z, computed from the
/// margin so it stays finite for saturated predictions.
inline double log_loss_from_margin(double z, double y) {
  // log(1 + e^z) - y z
  const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - y * z;
}

/// Column means and standard deviations (zero deviation mapped to 1).
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights) {
    Standardizer s;
    const double total = weights.sum();
    s.mean = (X.transpose() * weights) / total;
    s.scale.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      const double var = ((X.col(c).array() - s.mean(c)).square() * weights.array()).sum() / total;
      s.scale(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }

  template <typename Derived>
  Eigen::VectorXd apply_row(const Eigen::MatrixBase<Derived>& x) const {
    return (x - mean).cwiseQuotient(scale);
  }
};

}  // namespace patchclf
