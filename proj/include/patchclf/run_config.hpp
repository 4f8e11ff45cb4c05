#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "patchclf/combine.hpp"
#include "patchclf/filter.hpp"
#include "patchclf/model.hpp"
#include "patchclf/paragraph_vector.hpp"

namespace patchclf {

/// Effective settings of one CLI run. Every field has a default; a JSON
/// file overrides defaults and flags override the file. The whole record
/// is echoed into every artifact.
struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t k = 10;
  std::string features = "learned";  // learned | engineered | concat
  std::string learner = "gbt";
  std::string strategy = "concat";
  std::string threshold = "q1";  // q1 | mean | median | fixed
  double fixed_threshold = 0.5;
  unsigned workers = 0;
  int background_cap = 512;
  int top_k = 10;

  std::string output_dir = "out";
  std::string corpus;                // default <output_dir>/corpus.jsonl
  std::string embeddings;            // default <output_dir>/embeddings.jsonl
  std::string embedder_model;        // default <output_dir>/embedder.json
  std::string learned_features;      // default <output_dir>/learned_features.csv
  std::string engineered_features;   // default <output_dir>/engineered_features.csv

  ParagraphVectorConfig embedder;
  LearnerConfig learners;
  FusionConfig fusion;

  std::filesystem::path path_or(const std::string& value, const char* file_name) const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Merges `j` over the current values of `c`; unknown keys throw.
void merge(RunConfig& c, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace patchclf
