#include "patchclf/engineered.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

#include "patchclf/error.hpp"

namespace patchclf {

namespace {

// Pattern flags. Rules are exported with the registry.
const std::array<std::pair<const char*, const char*>, 12> kPatterns = {{
    {"singleLine", "exactly one changed line (removed + added == 1) across all hunks"},
    {"codeMove",
     "a removed line (whitespace-stripped, containing an alphanumeric character) reappears verbatim among the added "
     "lines at a different index of its side (old-side index vs new-side index)"},
    {"wrapsIf",
     "an added line opens 'if (' (ends with '{' or has no ';'/'{'), is directly followed by retained code (context "
     "or re-added removed line), and brace openers are closed by a later added '}' line"},
    {"unwrapIf", "mirror of wrapsIf over removed lines"},
    {"wrapsTryCatch",
     "an added line containing 'try' is directly followed by retained code and a later added line contains 'catch'"},
    {"unwrapTryCatch", "mirror of wrapsTryCatch over removed lines"},
    {"conditionalBlockAdd",
     "more added than removed lines open a '{' block with if/else/for/while"},
    {"conditionalBlockRemove",
     "more removed than added lines open a '{' block with if/else/for/while"},
    {"constantChange",
     "equal numbers of removed and added lines; paired in order, each pair has equal-length lexeme sequences that "
     "differ only at numeric or string literal lexemes, with at least one difference"},
    {"expressionFix",
     "equal numbers of removed and added lines; paired in order, each differing pair differs only inside the "
     "parenthesized condition of if/while/for"},
    {"onlyAddition", "no removed lines and at least one added line"},
    {"onlyRemoval", "no added lines and at least one removed line"},
}};

const std::array<const char*, 12> kKeywords = {"if",    "else",  "for",      "while", "return", "throw",
                                               "try",   "catch", "break",    "continue", "new", "null"};

const std::array<std::pair<const char*, const char*>, 8> kOtherCounters = {{
    {"op_arithmetic", "count of + - * / % ++ --"},
    {"op_relational", "count of == != < > <= >="},
    {"op_logical", "count of && || !"},
    {"op_assignment", "count of = += -= *= /= %= &= |= ^= <<= >>= >>>="},
    {"lit_numeric", "count of numeric literals"},
    {"lit_string", "count of string and char literals"},
    {"lit_boolean", "count of true/false"},
    {"calls", "count of non-keyword identifiers immediately followed by '('"},
}};

constexpr std::size_t kCounterCount = kKeywords.size() + kOtherCounters.size();

std::vector<std::string> counter_names() {
  std::vector<std::string> names;
  for (const char* kw : kKeywords) names.push_back(std::string("kw_") + kw);
  for (const auto& [name, rule] : kOtherCounters) names.emplace_back(name);
  return names;
}

std::vector<FeatureSpec> build_registry() {
  std::vector<FeatureSpec> reg;
  for (const auto& [name, rule] : kPatterns) reg.push_back({name, FeatureKind::Flag, rule});
  const auto counters = counter_names();
  std::vector<std::string> rules;
  for (const char* kw : kKeywords) rules.push_back(std::string("occurrences of keyword '") + kw + "'");
  for (const auto& [name, rule] : kOtherCounters) rules.emplace_back(rule);
  for (std::size_t i = 0; i < counters.size(); ++i) {
    reg.push_back({"buggy_" + counters[i], FeatureKind::Count, rules[i] + " in the buggy fragment"});
  }
  for (std::size_t i = 0; i < counters.size(); ++i) {
    reg.push_back({"patched_" + counters[i], FeatureKind::Count, rules[i] + " in the patched fragment"});
  }
  for (std::size_t i = 0; i < counters.size(); ++i) {
    reg.push_back({"delta_" + counters[i], FeatureKind::Delta, "patched minus buggy: " + rules[i]});
  }
  return reg;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

// Longest first.
const std::array<std::string_view, 38> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",   "->",  "::",  "<<",  "+",  "-",  "*",  "/",  "%",  "<",  ">",  "=",  "!",  "&",  "|",  "^",  "~",  "?",  ":"};

bool is_keyword(std::string_view s) {
  static constexpr std::array<std::string_view, 17> control = {
      "if", "else", "for", "while", "switch", "catch", "return", "throw", "try", "do", "synchronized",
      "new", "null", "true", "false", "break", "continue"};
  return std::find(control.begin(), control.end(), s) != control.end();
}

std::string strip_ws(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

bool has_alnum(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

bool contains_ident(const std::vector<Lexeme>& lx, std::string_view word) {
  return std::any_of(lx.begin(), lx.end(),
                     [&](const Lexeme& l) { return l.kind == LexemeKind::Identifier && l.text == word; });
}

bool contains_punct(const std::vector<Lexeme>& lx, std::string_view p) {
  return std::any_of(lx.begin(), lx.end(), [&](const Lexeme& l) { return l.kind == LexemeKind::Punct && l.text == p; });
}

bool opens_if(const std::vector<Lexeme>& lx) {
  for (std::size_t i = 0; i + 1 < lx.size(); ++i) {
    if (lx[i].kind == LexemeKind::Identifier && lx[i].text == "if" && lx[i + 1].text == "(") return true;
  }
  return false;
}

bool opens_block(const std::vector<Lexeme>& lx) {
  if (!contains_punct(lx, "{")) return false;
  return contains_ident(lx, "if") || contains_ident(lx, "else") || contains_ident(lx, "for") ||
         contains_ident(lx, "while");
}

// One side of the diff (old or new) as an ordered sequence.
struct SideLine {
  LineTag tag;
  std::string normalized;
  std::vector<Lexeme> lexemes;
  bool retained = false;  // context, or a changed line whose text also appears on the other side
};

struct DiffView {
  std::vector<SideLine> old_side;
  std::vector<SideLine> new_side;
  std::size_t removed = 0;
  std::size_t added = 0;
};

DiffView make_view(const HunkSet& hunks) {
  DiffView v;
  for (const auto& hunk : hunks.hunks) {
    for (const auto& line : hunk.lines) {
      SideLine s{line.tag, strip_ws(line.text), lex(line.text), line.tag == LineTag::Context};
      if (line.tag != LineTag::Added) v.old_side.push_back(s);
      if (line.tag != LineTag::Removed) v.new_side.push_back(std::move(s));
      if (line.tag == LineTag::Removed) ++v.removed;
      if (line.tag == LineTag::Added) ++v.added;
    }
  }
  auto mark = [](std::vector<SideLine>& side, const std::vector<SideLine>& other, LineTag tag, LineTag other_tag) {
    for (auto& s : side) {
      if (s.tag != tag || !has_alnum(s.normalized)) continue;
      s.retained = std::any_of(other.begin(), other.end(), [&](const SideLine& o) {
        return o.tag == other_tag && o.normalized == s.normalized;
      });
    }
  };
  mark(v.old_side, v.new_side, LineTag::Removed, LineTag::Added);
  mark(v.new_side, v.old_side, LineTag::Added, LineTag::Removed);
  return v;
}

bool detect_move(const DiffView& v) {
  for (std::size_t i = 0; i < v.old_side.size(); ++i) {
    const auto& r = v.old_side[i];
    if (r.tag != LineTag::Removed || !has_alnum(r.normalized)) continue;
    for (std::size_t j = 0; j < v.new_side.size(); ++j) {
      const auto& a = v.new_side[j];
      if (a.tag == LineTag::Added && a.normalized == r.normalized && i != j) return true;
    }
  }
  return false;
}

// `changed` is the tag of lines introduced on this side (Added for the new
// side, Removed for the old side).
bool detect_if_wrap(const std::vector<SideLine>& side, LineTag changed) {
  for (std::size_t i = 0; i + 1 < side.size(); ++i) {
    const auto& s = side[i];
    if (s.tag != changed || !opens_if(s.lexemes)) continue;
    const bool brace = !s.normalized.empty() && s.normalized.back() == '{';
    const bool braceless = !contains_punct(s.lexemes, "{") && !contains_punct(s.lexemes, ";");
    if (!brace && !braceless) continue;
    if (!side[i + 1].retained) continue;
    if (braceless) return true;
    for (std::size_t j = i + 2; j < side.size(); ++j) {
      if (side[j].tag == changed && side[j].normalized.starts_with("}")) return true;
    }
  }
  return false;
}

bool detect_try_wrap(const std::vector<SideLine>& side, LineTag changed) {
  for (std::size_t i = 0; i + 1 < side.size(); ++i) {
    const auto& s = side[i];
    if (s.tag != changed || !contains_ident(s.lexemes, "try")) continue;
    if (!side[i + 1].retained) continue;
    for (std::size_t j = i + 2; j < side.size(); ++j) {
      if (side[j].tag == changed && contains_ident(side[j].lexemes, "catch")) return true;
    }
  }
  return false;
}

std::vector<const SideLine*> changed_lines(const std::vector<SideLine>& side, LineTag tag) {
  std::vector<const SideLine*> out;
  for (const auto& s : side) {
    if (s.tag == tag) out.push_back(&s);
  }
  return out;
}

bool is_literal(const Lexeme& l) { return l.kind == LexemeKind::Number || l.kind == LexemeKind::String; }

bool detect_constant_change(const DiffView& v) {
  const auto removed = changed_lines(v.old_side, LineTag::Removed);
  const auto added = changed_lines(v.new_side, LineTag::Added);
  if (removed.empty() || removed.size() != added.size()) return false;
  bool any_difference = false;
  for (std::size_t p = 0; p < removed.size(); ++p) {
    const auto& a = removed[p]->lexemes;
    const auto& b = added[p]->lexemes;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;
      if (!is_literal(a[i]) || !is_literal(b[i])) return false;
      any_difference = true;
    }
  }
  return any_difference;
}

// [open, close] lexeme indices of the first if/while/for condition.
std::optional<std::pair<std::size_t, std::size_t>> condition_span(const std::vector<Lexeme>& lx) {
  for (std::size_t i = 0; i + 1 < lx.size(); ++i) {
    if (lx[i].kind != LexemeKind::Identifier) continue;
    if (lx[i].text != "if" && lx[i].text != "while" && lx[i].text != "for") continue;
    if (lx[i + 1].text != "(") continue;
    int depth = 0;
    for (std::size_t j = i + 1; j < lx.size(); ++j) {
      if (lx[j].kind != LexemeKind::Punct) continue;
      if (lx[j].text == "(") ++depth;
      if (lx[j].text == ")" && --depth == 0) return std::make_pair(i + 1, j);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

bool detect_expression_fix(const DiffView& v) {
  const auto removed = changed_lines(v.old_side, LineTag::Removed);
  const auto added = changed_lines(v.new_side, LineTag::Added);
  if (removed.empty() || removed.size() != added.size()) return false;
  bool any_difference = false;
  for (std::size_t p = 0; p < removed.size(); ++p) {
    const auto& a = removed[p]->lexemes;
    const auto& b = added[p]->lexemes;
    if (a == b) continue;
    const auto sa = condition_span(a);
    const auto sb = condition_span(b);
    if (!sa || !sb) return false;
    const bool same_prefix = sa->first == sb->first && std::equal(a.begin(), a.begin() + sa->first, b.begin());
    const std::size_t tail_a = a.size() - sa->second;
    const std::size_t tail_b = b.size() - sb->second;
    const bool same_suffix = tail_a == tail_b && std::equal(a.begin() + sa->second, a.end(), b.begin() + sb->second);
    if (!same_prefix || !same_suffix) return false;
    any_difference = true;
  }
  return any_difference;
}

std::array<double, kCounterCount> count(std::string_view text) {
  std::array<double, kCounterCount> c{};
  const auto lx = lex(text);
  constexpr std::size_t base = kKeywords.size();
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const auto& l = lx[i];
    switch (l.kind) {
      case LexemeKind::Identifier: {
        for (std::size_t k = 0; k < kKeywords.size(); ++k) {
          if (l.text == kKeywords[k]) c[k] += 1;
        }
        if (l.text == "true" || l.text == "false") c[base + 6] += 1;
        if (!is_keyword(l.text) && i + 1 < lx.size() && lx[i + 1].text == "(") c[base + 7] += 1;
        break;
      }
      case LexemeKind::Number: c[base + 4] += 1; break;
      case LexemeKind::String: c[base + 5] += 1; break;
      case LexemeKind::Operator: {
        static constexpr std::array<std::string_view, 7> arith = {"+", "-", "*", "/", "%", "++", "--"};
        static constexpr std::array<std::string_view, 6> rel = {"==", "!=", "<", ">", "<=", ">="};
        static constexpr std::array<std::string_view, 3> logic = {"&&", "||", "!"};
        static constexpr std::array<std::string_view, 12> assign = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                                                    "&=", "|=", "^=", "<<=", ">>=", ">>>="};
        auto in = [&](const auto& set) { return std::find(set.begin(), set.end(), l.text) != set.end(); };
        if (in(arith)) c[base + 0] += 1;
        else if (in(rel)) c[base + 1] += 1;
        else if (in(logic)) c[base + 2] += 1;
        else if (in(assign)) c[base + 3] += 1;
        break;
      }
      case LexemeKind::Punct: break;
    }
  }
  return c;
}

}  // namespace

const std::vector<FeatureSpec>& engineered_registry() {
  static const std::vector<FeatureSpec> registry = build_registry();
  return registry;
}

std::vector<std::string> engineered_feature_names() {
  std::vector<std::string> names;
  for (const auto& spec : engineered_registry()) names.push_back(spec.name);
  return names;
}

nlohmann::json registry_to_json() {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& spec : engineered_registry()) {
    const char* kind = spec.kind == FeatureKind::Flag ? "flag" : spec.kind == FeatureKind::Count ? "count" : "delta";
    features.push_back({{"name", spec.name}, {"kind", kind}, {"rule", spec.rule}});
  }
  return {{"version", kEngineeredRegistryVersion}, {"features", features}};
}

std::vector<Lexeme> lex(std::string_view text) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      out.push_back({LexemeKind::Identifier, std::string(text.substr(i, j - i))});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i + 1;
      while (j < text.size() &&
             (is_ident_char(text[j]) || text[j] == '.' ||
              ((text[j] == '-' || text[j] == '+') && (text[j - 1] == 'e' || text[j - 1] == 'E') &&
               !(text.substr(i, 2) == "0x" || text.substr(i, 2) == "0X")))) {
        ++j;
      }
      out.push_back({LexemeKind::Number, std::string(text.substr(i, j - i))});
      i = j;
    } else if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != c) j += (text[j] == '\\') ? 2 : 1;
      j = std::min(j + 1, text.size());
      out.push_back({LexemeKind::String, std::string(text.substr(i, j - i))});
      i = j;
    } else {
      std::string_view rest = text.substr(i);
      auto op = std::find_if(kOperators.begin(), kOperators.end(),
                             [&](std::string_view o) { return rest.starts_with(o); });
      if (op != kOperators.end()) {
        out.push_back({LexemeKind::Operator, std::string(*op)});
        i += op->size();
      } else {
        out.push_back({LexemeKind::Punct, std::string(1, c)});
        ++i;
      }
    }
  }
  return out;
}

double NamedValues::at(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("engineered", "unknown feature '" + std::string(name) + "'");
  return values[static_cast<std::size_t>(it - names.begin())];
}

double EngineeredVector::at(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("engineered", "unknown feature '" + std::string(name) + "'");
  return values(it - names.begin());
}

NamedValues extract_patterns(const HunkSet& hunks) {
  const DiffView v = make_view(hunks);
  const std::array<bool, 12> flags = {
      v.removed + v.added == 1,
      detect_move(v),
      detect_if_wrap(v.new_side, LineTag::Added),
      detect_if_wrap(v.old_side, LineTag::Removed),
      detect_try_wrap(v.new_side, LineTag::Added),
      detect_try_wrap(v.old_side, LineTag::Removed),
      false,
      false,
      detect_constant_change(v),
      detect_expression_fix(v),
      v.removed == 0 && v.added > 0,
      v.added == 0 && v.removed > 0,
  };
  NamedValues out;
  for (std::size_t i = 0; i < kPatterns.size(); ++i) {
    out.names.emplace_back(kPatterns[i].first);
    out.values.push_back(flags[i] ? 1.0 : 0.0);
  }
  long openers = 0;
  for (const auto& s : v.new_side) {
    if (s.tag == LineTag::Added && opens_block(s.lexemes)) ++openers;
  }
  for (const auto& s : v.old_side) {
    if (s.tag == LineTag::Removed && opens_block(s.lexemes)) --openers;
  }
  out.values[6] = openers > 0 ? 1.0 : 0.0;
  out.values[7] = openers < 0 ? 1.0 : 0.0;
  return out;
}

NamedValues extract_code_description(const FragmentPair& fragments) {
  const auto names = counter_names();
  const auto buggy = count(fragments.buggy_text);
  const auto patched = count(fragments.patched_text);
  NamedValues out;
  for (std::size_t i = 0; i < kCounterCount; ++i) {
    out.names.push_back("buggy_" + names[i]);
    out.values.push_back(buggy[i]);
  }
  for (std::size_t i = 0; i < kCounterCount; ++i) {
    out.names.push_back("patched_" + names[i]);
    out.values.push_back(patched[i]);
  }
  for (std::size_t i = 0; i < kCounterCount; ++i) {
    out.names.push_back("delta_" + names[i]);
    out.values.push_back(patched[i] - buggy[i]);
  }
  return out;
}

EngineeredVector extract_all(const HunkSet& hunks) {
  const auto patterns = extract_patterns(hunks);
  const auto description = extract_code_description(extract_fragments(hunks));
  EngineeredVector out;
  out.names = patterns.names;
  out.names.insert(out.names.end(), description.names.begin(), description.names.end());
  out.values.resize(static_cast<Eigen::Index>(out.names.size()));
  Eigen::Index k = 0;
  for (double x : patterns.values) out.values(k++) = x;
  for (double x : description.values) out.values(k++) = x;
  return out;
}

EngineeredVector extract_all(const PatchRecord& record) { return extract_all(parse_diff(record.diff_text)); }

}  // namespace patchclf
