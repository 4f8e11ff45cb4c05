#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "patchclf/corpus.hpp"
#include "patchclf/diffparse.hpp"

namespace patchclf {

enum class FeatureKind { Flag, Count, Delta };

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
  std::string rule;
};

/// Ordered feature registry. Every vector produced by extract_all follows
/// this layout: [pattern flags | buggy counts | patched counts | deltas].
const std::vector<FeatureSpec>& engineered_registry();
std::vector<std::string> engineered_feature_names();
inline constexpr std::string_view kEngineeredRegistryVersion = "lexical-1";
nlohmann::json registry_to_json();

/// Lexeme classes used by the code-description counters.
enum class LexemeKind { Identifier, Number, String, Operator, Punct };

struct Lexeme {
  LexemeKind kind;
  std::string text;
  bool operator==(const Lexeme&) const = default;
};

/// Literal-aware lexer: string and char literals are single lexemes,
/// multi-character operators use longest match.
std::vector<Lexeme> lex(std::string_view text);

struct NamedValues {
  std::vector<std::string> names;
  std::vector<double> values;

  double at(std::string_view name) const;
};

NamedValues extract_patterns(const HunkSet& hunks);

/// Counts for the buggy fragment, the patched fragment and their
/// differences (patched - buggy), in that order.
NamedValues extract_code_description(const FragmentPair& fragments);

struct EngineeredVector {
  std::vector<std::string> names;
  Eigen::VectorXd values;

  double at(std::string_view name) const;
};

EngineeredVector extract_all(const HunkSet& hunks);
EngineeredVector extract_all(const PatchRecord& record);

}  // namespace patchclf
