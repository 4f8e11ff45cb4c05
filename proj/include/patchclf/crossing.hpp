#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "patchclf/embedding.hpp"
#include "patchclf/similarity.hpp"

namespace patchclf {

/// Learned patch feature of length 2n + 2 with the fixed layout
///   [patched - buggy (n) | patched * buggy (n) | cosine | euclidean similarity]
template <typename B, typename P>
Eigen::VectorXd cross(const Eigen::MatrixBase<B>& buggy, const Eigen::MatrixBase<P>& patched) {
  detail::require_same_length(buggy, patched, "cross");
  const Eigen::Index n = buggy.size();
  Eigen::VectorXd out(2 * n + 2);
  out.head(n) = patched - buggy;
  out.segment(n, n) = patched.cwiseProduct(buggy);
  out(2 * n) = cosine(buggy, patched);
  out(2 * n + 1) = euclidean_similarity(buggy, patched);
  return out;
}

inline Eigen::VectorXd cross(const EmbeddingPair& pair) { return cross(pair.buggy, pair.patched); }

/// Feature names "B-0" .. "B-(2n+1)" in crossing order.
inline std::vector<std::string> crossed_feature_names(Eigen::Index n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(2 * n + 2));
  for (Eigen::Index i = 0; i < 2 * n + 2; ++i) names.push_back("B-" + std::to_string(i));
  return names;
}

}  // namespace patchclf
