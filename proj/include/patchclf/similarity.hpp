#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "patchclf/error.hpp"

namespace patchclf {

/// Similarity value plus a flag raised when the value is a defined fallback
/// rather than the formula (zero-norm input to cosine).
struct Similarity {
  double value = 0.0;
  bool degenerate = false;
};

namespace detail {
template <typename A, typename B>
void require_same_length(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* what) {
  if (a.size() != b.size()) {
    throw Error("embed", std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
  }
}
}  // namespace detail

/// Cosine similarity in [-1, 1]. A zero-norm operand yields 0 with the
/// degenerate flag set (pure insertions produce empty buggy fragments).
template <typename A, typename B>
Similarity cosine_flagged(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::require_same_length(a, b, "cosine");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  const double c = a.dot(b) / (na * nb);
  return {std::clamp(c, -1.0, 1.0), false};
}

template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return cosine_flagged(a, b).value;
}

/// 1 / (1 + ||a - b||), mapping distance onto (0, 1].
template <typename A, typename B>
double euclidean_similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::require_same_length(a, b, "euclidean_similarity");
  return 1.0 / (1.0 + (a - b).norm());
}

}  // namespace patchclf
