#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace patchclf {

enum class LineTag { Context, Removed, Added };

struct DiffLine {
  LineTag tag = LineTag::Context;
  std::string text;  // without the leading marker character

  bool operator==(const DiffLine&) const = default;
};

struct Hunk {
  std::string header;
  std::vector<DiffLine> lines;

  bool operator==(const Hunk&) const = default;
};

struct HunkSet {
  std::vector<Hunk> hunks;

  bool operator==(const HunkSet&) const = default;
};

/// Buggy side = removed + context lines, patched side = added + context
/// lines, each flattened to one line.
struct FragmentPair {
  std::string buggy_text;
  std::string patched_text;
  std::vector<std::string> buggy_tokens;
  std::vector<std::string> patched_tokens;
};

/// Parses a single-file unified diff. File-header lines ("diff ", "index ",
/// "---"/"+++" pairs) are skipped; body lines are tagged by their first
/// character. Throws patchclf::Error when no "@@" header exists or a body
/// line has an unknown prefix.
HunkSet parse_diff(std::string_view diff_text);

/// Inverse of parse_diff for the hunk bodies (file headers are not kept).
std::string serialize(const HunkSet& hunks);

FragmentPair extract_fragments(const HunkSet& hunks);

/// Collapses whitespace runs to a single space and trims both ends.
std::string flatten(std::string_view text);

/// Lexical split: identifiers, keywords and numbers stay whole, every other
/// non-space character becomes a one-character token.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace patchclf
