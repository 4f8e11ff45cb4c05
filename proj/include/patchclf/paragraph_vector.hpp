#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace patchclf {

struct ParagraphVectorConfig {
  int dim = 64;
  int epochs = 100;
  int negative_samples = 5;
  double learning_rate = 0.025;
  int min_token_count = 1;
  std::uint64_t seed = 1;
};

void to_json(nlohmann::json& j, const ParagraphVectorConfig& c);
void from_json(const nlohmann::json& j, ParagraphVectorConfig& c);

/// Distributed bag-of-words paragraph vectors trained with negative
/// sampling. Document vectors are fitted so that each scores its own tokens
/// above tokens drawn from the smoothed unigram distribution.
class ParagraphVectorModel {
 public:
  using Document = std::vector<std::string>;
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct TrainingLoss {
    double initial = 0.0;  // mean loss per scored target, first epoch
    double final = 0.0;    // same, last epoch
  };

  struct Inference {
    Eigen::VectorXd vector;
    bool warning = false;  // no in-vocabulary token; vector is zero
  };

  /// Throws when fewer than two tokens survive min_token_count, or when the
  /// loss becomes non-finite.
  static ParagraphVectorModel train(const std::vector<Document>& documents, const ParagraphVectorConfig& config);

  /// Fits a fresh document vector against the frozen output matrix.
  /// Deterministic: the start point and negative draws are seeded from the
  /// model seed and the token sequence.
  Inference infer(const Document& tokens) const;

  const ParagraphVectorConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const RowMatrix& word_matrix() const { return words_; }
  const RowMatrix& document_matrix() const { return docs_; }
  const TrainingLoss& loss() const { return loss_; }
  int index_of(const std::string& token) const;

  nlohmann::json to_json() const;
  static ParagraphVectorModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ParagraphVectorModel load(const std::filesystem::path& path);

 private:
  void build_noise_table();
  std::vector<int> encode(const Document& tokens) const;

  ParagraphVectorConfig config_;
  std::vector<std::string> vocab_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> index_;
  RowMatrix words_;  // |V| x n output vectors, one row per token
  RowMatrix docs_;   // D x n trained document vectors
  std::vector<double> noise_cdf_;
  TrainingLoss loss_;
};

}  // namespace patchclf
