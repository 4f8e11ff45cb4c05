#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace patchclf {

/// Row-aligned feature table: one row per patch, label 1 = correct,
/// 0 = incorrect, -1 = unlabeled.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::string> patch_ids;
  std::vector<std::string> bug_ids;
  Eigen::MatrixXd X;
  Eigen::VectorXi y;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }

  FeatureMatrix select_rows(std::span<const Eigen::Index> rows) const;
  /// Throws when a value is non-finite or a dimension disagrees.
  void validate() const;
};

/// [a | b] with rows matched by position; patch ids must agree.
FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b);

/// CSV: header "patch_id,bug_id,label,<feature names...>". Lines starting
/// with '#' are comments (used for provenance).
std::string to_csv(const FeatureMatrix& m, const nlohmann::json& provenance = nullptr);
void write_csv(const FeatureMatrix& m, const std::filesystem::path& path, const nlohmann::json& provenance = nullptr);
FeatureMatrix parse_csv(std::string_view text);
FeatureMatrix read_csv(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace patchclf
