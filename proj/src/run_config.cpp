#include "patchclf/run_config.hpp"

#include <fstream>
#include <set>

#include "patchclf/error.hpp"

namespace patchclf {

std::filesystem::path RunConfig::path_or(const std::string& value, const char* file_name) const {
  if (!value.empty()) return value;
  return std::filesystem::path(output_dir) / file_name;
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"seed", c.seed},
       {"k", c.k},
       {"features", c.features},
       {"learner", c.learner},
       {"strategy", c.strategy},
       {"threshold", c.threshold},
       {"fixed_threshold", c.fixed_threshold},
       {"workers", c.workers},
       {"background_cap", c.background_cap},
       {"top_k", c.top_k},
       {"paths",
        {{"output_dir", c.output_dir},
         {"corpus", c.corpus},
         {"embeddings", c.embeddings},
         {"embedder_model", c.embedder_model},
         {"learned_features", c.learned_features},
         {"engineered_features", c.engineered_features}}},
       {"embedder", c.embedder},
       {"learners", c.learners},
       {"fusion", c.fusion}};
}

namespace {

// Every key of `given` must exist in `known`, recursively through objects.
void check_keys(const nlohmann::json& given, const nlohmann::json& known, const std::string& where) {
  for (const auto& [key, value] : given.items()) {
    const auto it = known.find(key);
    if (it == known.end()) throw Error("cli", "unknown configuration key '" + where + key + "'");
    if (value.is_object() && it->is_object()) check_keys(value, *it, where + key + ".");
  }
}

}  // namespace

void merge(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("cli", "run configuration must be a JSON object");
  check_keys(j, nlohmann::json(RunConfig{}), "");
  try {
    c.seed = j.value("seed", c.seed);
    c.k = j.value("k", c.k);
    c.features = j.value("features", c.features);
    c.learner = j.value("learner", c.learner);
    c.strategy = j.value("strategy", c.strategy);
    c.threshold = j.value("threshold", c.threshold);
    c.fixed_threshold = j.value("fixed_threshold", c.fixed_threshold);
    c.workers = j.value("workers", c.workers);
    c.background_cap = j.value("background_cap", c.background_cap);
    c.top_k = j.value("top_k", c.top_k);
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      c.output_dir = p.value("output_dir", c.output_dir);
      c.corpus = p.value("corpus", c.corpus);
      c.embeddings = p.value("embeddings", c.embeddings);
      c.embedder_model = p.value("embedder_model", c.embedder_model);
      c.learned_features = p.value("learned_features", c.learned_features);
      c.engineered_features = p.value("engineered_features", c.engineered_features);
    }
    if (j.contains("embedder")) {
      nlohmann::json e = c.embedder;
      e.update(j["embedder"]);
      c.embedder = e.get<ParagraphVectorConfig>();
    }
    if (j.contains("learners")) {
      nlohmann::json l = c.learners;
      l.merge_patch(j["learners"]);
      c.learners = l.get<LearnerConfig>();
    }
    if (j.contains("fusion")) {
      nlohmann::json f = c.fusion;
      f.update(j["fusion"]);
      c.fusion = f.get<FusionConfig>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("cli", std::string("invalid configuration value: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "cannot open configuration " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("cli", "configuration " + path.string() + " does not parse: " + e.what());
  }
  RunConfig c;
  merge(c, j);
  return c;
}

}  // namespace patchclf
