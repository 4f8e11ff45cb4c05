#include "patchclf/diffparse.hpp"

#include <cctype>

#include "patchclf/error.hpp"

namespace patchclf {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

bool is_file_header(std::string_view line) {
  return line.starts_with("diff ") || line.starts_with("index ") || line.starts_with("new file mode") ||
         line.starts_with("deleted file mode") || line.starts_with("similarity index") ||
         line.starts_with("old mode") || line.starts_with("new mode");
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '$';
}

}  // namespace

HunkSet parse_diff(std::string_view diff_text) {
  if (diff_text.empty()) throw Error("diffparse", "empty diff");
  const auto lines = split_lines(diff_text);

  HunkSet result;
  bool in_hunk = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.starts_with("@@")) {
      result.hunks.push_back({std::string(line), {}});
      in_hunk = true;
      continue;
    }
    if (!in_hunk) continue;  // preamble before the first hunk

    if (is_file_header(line)) {
      in_hunk = false;
      continue;
    }
    // A "--- a" / "+++ b" pair directly followed by a hunk header is a file
    // header even inside a body.
    if (line.starts_with("--- ") && i + 2 < lines.size() && lines[i + 1].starts_with("+++ ") &&
        lines[i + 2].starts_with("@@")) {
      ++i;
      continue;
    }
    if (line.starts_with("\\")) continue;  // "\ No newline at end of file"

    if (line.empty()) {
      // Trailing blank line at end of text, or a context line whose single
      // space was stripped by an editor.
      if (i + 1 == lines.size()) continue;
      result.hunks.back().lines.push_back({LineTag::Context, ""});
      continue;
    }
    switch (line.front()) {
      case ' ': result.hunks.back().lines.push_back({LineTag::Context, std::string(line.substr(1))}); break;
      case '-': result.hunks.back().lines.push_back({LineTag::Removed, std::string(line.substr(1))}); break;
      case '+': result.hunks.back().lines.push_back({LineTag::Added, std::string(line.substr(1))}); break;
      default:
        throw Error("diffparse", "unknown diff line prefix in line " + std::to_string(i + 1) + ": '" +
                                     std::string(line) + "'");
    }
  }
  if (result.hunks.empty()) throw Error("diffparse", "no '@@' hunk header found", "is this a unified diff?");
  return result;
}

std::string serialize(const HunkSet& hunks) {
  std::string out;
  for (const auto& hunk : hunks.hunks) {
    out += hunk.header;
    out += '\n';
    for (const auto& line : hunk.lines) {
      switch (line.tag) {
        case LineTag::Context: out += ' '; break;
        case LineTag::Removed: out += '-'; break;
        case LineTag::Added: out += '+'; break;
      }
      out += line.text;
      out += '\n';
    }
  }
  return out;
}

std::string flatten(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

FragmentPair extract_fragments(const HunkSet& hunks) {
  std::string buggy;
  std::string patched;
  for (const auto& hunk : hunks.hunks) {
    for (const auto& line : hunk.lines) {
      if (line.tag != LineTag::Added) {
        buggy += line.text;
        buggy += ' ';
      }
      if (line.tag != LineTag::Removed) {
        patched += line.text;
        patched += ' ';
      }
    }
  }
  FragmentPair pair;
  pair.buggy_text = flatten(buggy);
  pair.patched_text = flatten(patched);
  pair.buggy_tokens = tokenize(pair.buggy_text);
  pair.patched_tokens = tokenize(pair.patched_text);
  return pair;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_space(c)) {
      ++i;
    } else if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      // 42, 3.14, 0x1F, 1e-3f, 10L
      std::size_t j = i + 1;
      while (j < text.size()) {
        const char d = text[j];
        if (is_ident_char(d) || d == '.') {
          ++j;
        } else if ((d == '-' || d == '+') && (text[j - 1] == 'e' || text[j - 1] == 'E') &&
                   text.substr(i, 2) != "0x" && text.substr(i, 2) != "0X") {
          ++j;
        } else {
          break;
        }
      }
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      tokens.emplace_back(1, c);
      ++i;
    }
  }
  return tokens;
}

}  // namespace patchclf
