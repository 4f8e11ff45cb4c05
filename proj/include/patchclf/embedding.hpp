#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace patchclf {

/// Buggy and patched fragment vectors of one patch from a single provider.
struct EmbeddingPair {
  std::string patch_id;
  Eigen::VectorXd buggy;
  Eigen::VectorXd patched;
  std::string provider;

  Eigen::Index n() const { return buggy.size(); }
};

/// Reads {patch_id, buggy_vec, patched_vec} JSONL. The dimension is taken
/// from the first record; later mismatches and non-finite values throw.
std::vector<EmbeddingPair> import_embeddings(const std::filesystem::path& path,
                                             const std::string& provider = "imported");
std::vector<EmbeddingPair> parse_embeddings(std::string_view jsonl, const std::string& provider = "imported");

std::string embeddings_to_jsonl(const std::vector<EmbeddingPair>& pairs);
void export_embeddings(const std::vector<EmbeddingPair>& pairs, const std::filesystem::path& path);

}  // namespace patchclf
