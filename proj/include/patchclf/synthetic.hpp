#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "patchclf/corpus.hpp"
#include "patchclf/embedding.hpp"

namespace patchclf {

/// Where the label lives. `learned` ties it to a learned-space signal s1,
/// `engineered` to the codeMove flag s2, `xor` to s1 XOR s2, `none` to a
/// coin flip.
enum class SignalMode { Learned, Engineered, Xor, None };

std::string_view to_string(SignalMode m);
SignalMode parse_signal_mode(std::string_view text);

struct SyntheticConfig {
  int bugs = 40;
  int patches_per_bug = 5;
  SignalMode mode = SignalMode::Learned;
  std::uint64_t seed = 1;
  int dim = 64;             // provider embedding width
  int signal_dims = 4;      // dimensions shifted by s1
  double signal = 1.0;      // shift magnitude
  double noise = 0.25;      // patched = buggy + noise + shift
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<EmbeddingPair> embeddings;  // provider "synthetic"
  std::vector<int> learned_signal;        // s1 per record
  std::vector<int> engineered_signal;     // s2 per record
};

/// Records are unique by construction. s1 is carried by identifier pools
/// in the added lines and by the provider embeddings; s2 decides whether a
/// removed statement reappears at another position.
SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

}  // namespace patchclf
