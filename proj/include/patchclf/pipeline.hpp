#pragma once

#include <string>
#include <vector>

#include "patchclf/corpus.hpp"
#include "patchclf/diffparse.hpp"
#include "patchclf/embedding.hpp"
#include "patchclf/features.hpp"
#include "patchclf/paragraph_vector.hpp"

namespace patchclf {

struct CorpusFragments {
  std::string patch_id;
  FragmentPair fragments;
};

std::vector<CorpusFragments> corpus_fragments(const Corpus& corpus);

/// Buggy and patched token lists of every patch, in that order.
std::vector<ParagraphVectorModel::Document> embedder_documents(const std::vector<CorpusFragments>& fragments);

struct EmbedResult {
  std::vector<EmbeddingPair> pairs;
  std::size_t warnings = 0;  // fragments embedded as the zero vector
};

EmbedResult embed_fragments(const ParagraphVectorModel& model, const std::vector<CorpusFragments>& fragments,
                            unsigned workers = 0);

/// Label column: 1 correct, 0 incorrect, -1 unlabeled.
int label_value(Label label);

/// Crossed features in corpus order; every patch needs an embedding pair.
FeatureMatrix learned_features(const Corpus& corpus, const std::vector<EmbeddingPair>& pairs);
FeatureMatrix engineered_features(const Corpus& corpus, unsigned workers = 0);

}  // namespace patchclf
