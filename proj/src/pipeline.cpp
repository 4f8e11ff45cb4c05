#include "patchclf/pipeline.hpp"

#include <unordered_map>

#include "patchclf/crossing.hpp"
#include "patchclf/engineered.hpp"
#include "patchclf/error.hpp"
#include "patchclf/parallel.hpp"

namespace patchclf {

std::vector<CorpusFragments> corpus_fragments(const Corpus& corpus) {
  std::vector<CorpusFragments> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records) out.push_back({r.patch_id, extract_fragments(parse_diff(r.diff_text))});
  return out;
}

std::vector<ParagraphVectorModel::Document> embedder_documents(const std::vector<CorpusFragments>& fragments) {
  std::vector<ParagraphVectorModel::Document> docs;
  docs.reserve(2 * fragments.size());
  for (const auto& f : fragments) {
    docs.push_back(f.fragments.buggy_tokens);
    docs.push_back(f.fragments.patched_tokens);
  }
  return docs;
}

EmbedResult embed_fragments(const ParagraphVectorModel& model, const std::vector<CorpusFragments>& fragments,
                            unsigned workers) {
  EmbedResult out;
  out.pairs.resize(fragments.size());
  std::vector<int> warned(fragments.size(), 0);
  parallel_for(fragments.size(), workers, [&](std::size_t i) {
    const auto b = model.infer(fragments[i].fragments.buggy_tokens);
    const auto p = model.infer(fragments[i].fragments.patched_tokens);
    out.pairs[i] = {fragments[i].patch_id, b.vector, p.vector, "paragraph-vector"};
    warned[i] = int(b.warning) + int(p.warning);
  });
  for (int w : warned) out.warnings += static_cast<std::size_t>(w);
  return out;
}

int label_value(Label label) {
  switch (label) {
    case Label::Correct: return 1;
    case Label::Incorrect: return 0;
    case Label::Unlabeled: return -1;
  }
  return -1;
}

namespace {

FeatureMatrix skeleton(const Corpus& corpus, std::vector<std::string> names) {
  FeatureMatrix m;
  m.names = std::move(names);
  m.X.resize(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(m.names.size()));
  m.y.resize(static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.records[i];
    m.patch_ids.push_back(r.patch_id);
    m.bug_ids.push_back(r.bug_id);
    m.y(static_cast<Eigen::Index>(i)) = label_value(r.label);
  }
  return m;
}

}  // namespace

FeatureMatrix learned_features(const Corpus& corpus, const std::vector<EmbeddingPair>& pairs) {
  if (pairs.empty()) throw Error("crossing", "no embeddings given");
  std::unordered_map<std::string, const EmbeddingPair*> by_id;
  for (const auto& p : pairs) by_id[p.patch_id] = &p;
  const Eigen::Index n = pairs.front().n();
  FeatureMatrix m = skeleton(corpus, crossed_feature_names(n));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto it = by_id.find(corpus.records[i].patch_id);
    if (it == by_id.end()) throw Error("crossing", "patch " + corpus.records[i].patch_id + " has no embedding");
    if (it->second->n() != n) throw Error("crossing", "patch " + it->second->patch_id + " has a different dimension");
    m.X.row(static_cast<Eigen::Index>(i)) = cross(*it->second).transpose();
  }
  return m;
}

FeatureMatrix engineered_features(const Corpus& corpus, unsigned workers) {
  FeatureMatrix m = skeleton(corpus, engineered_feature_names());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    m.X.row(static_cast<Eigen::Index>(i)) = extract_all(corpus.records[i]).values.transpose();
  });
  return m;
}

}  // namespace patchclf
