#include "patchclf/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "patchclf/error.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

using nlohmann::json;

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Correct: return "correct";
    case Label::Incorrect: return "incorrect";
    case Label::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

Label parse_label(std::string_view text) {
  if (text == "correct") return Label::Correct;
  if (text == "incorrect") return Label::Incorrect;
  if (text == "unlabeled") return Label::Unlabeled;
  throw Error("corpus", "unknown label '" + std::string(text) + "'",
              "labels are correct|incorrect|unlabeled");
}

std::vector<std::string> Corpus::distinct_bugs() const {
  std::vector<std::string> bugs;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.bug_id).second) bugs.push_back(r.bug_id);
  }
  return bugs;
}

std::string normalize_diff(std::string_view diff) {
  std::string out;
  out.reserve(diff.size());
  std::size_t pos = 0;
  while (pos <= diff.size()) {
    std::size_t end = diff.find('\n', pos);
    if (end == std::string_view::npos) end = diff.size();
    std::string_view line = diff.substr(pos, end - pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
      line.remove_suffix(1);
    }
    out.append(line);
    if (end < diff.size()) out.push_back('\n');
    pos = end + 1;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

namespace {

bool has_hunk_header(std::string_view diff) {
  if (diff.starts_with("@@")) return true;
  return diff.find("\n@@") != std::string_view::npos;
}

std::string required_string(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + field + "' is not a string");
  return it->get<std::string>();
}

PatchRecord parse_record(std::string_view line, IngestMode mode) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");

  PatchRecord r;
  r.patch_id = required_string(obj, "patch_id");
  r.bug_id = required_string(obj, "bug_id");
  r.project = required_string(obj, "project");
  r.tool = required_string(obj, "tool");
  const std::string label = required_string(obj, "label");
  r.diff_text = required_string(obj, "diff_text");

  if (r.patch_id.empty()) throw std::invalid_argument("empty patch_id");
  if (r.bug_id.empty()) throw std::invalid_argument("empty bug_id");
  try {
    r.label = parse_label(label);
  } catch (const Error&) {
    throw std::invalid_argument("unknown label '" + label + "'");
  }
  if (mode == IngestMode::Training && r.label == Label::Unlabeled) {
    throw std::invalid_argument("unlabeled record in a training corpus");
  }
  if (!has_hunk_header(r.diff_text)) throw std::invalid_argument("diff_text has no '@@' hunk header");
  return r;
}

}  // namespace

IngestResult ingest_lines(std::string_view text, IngestMode mode, std::string provenance) {
  IngestResult result;
  result.corpus.provenance = std::move(provenance);

  std::unordered_set<std::string> ids;
  std::set<std::pair<std::string, std::string>> keys;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    PatchRecord record;
    try {
      record = parse_record(line, mode);
    } catch (const std::exception& e) {
      result.report.rejected.push_back({line_no, e.what()});
      continue;
    }
    if (!keys.emplace(record.bug_id, normalize_diff(record.diff_text)).second) {
      ++result.report.duplicates;
      continue;
    }
    if (!ids.insert(record.patch_id).second) {
      result.report.rejected.push_back({line_no, "duplicate patch_id '" + record.patch_id + "'"});
      continue;
    }
    result.corpus.records.push_back(std::move(record));
  }
  result.report.ingested = result.corpus.records.size();

  if (result.corpus.records.empty()) {
    std::ostringstream msg;
    msg << "no valid records";
    for (const auto& rej : result.report.rejected) msg << "; line " << rej.line << ": " << rej.reason;
    throw Error("corpus", msg.str(), "check the JSONL fields: patch_id, bug_id, project, tool, label, diff_text");
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, IngestMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("corpus", "cannot open " + path.string(), "check the corpus path");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_lines(buf.str(), mode, path.string());
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records) {
    json obj = {{"patch_id", r.patch_id}, {"bug_id", r.bug_id}, {"project", r.project},
                {"tool", r.tool}, {"label", to_string(r.label)}, {"diff_text", r.diff_text}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void persist(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("corpus", "cannot write " + path.string());
  out << to_jsonl(corpus);
}

int FoldPlan::group_of(std::string_view bug_id) const {
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (std::find(groups[g].begin(), groups[g].end(), bug_id) != groups[g].end()) {
      return static_cast<int>(g);
    }
  }
  return -1;
}

FoldPlan split_by_bug(std::span<const std::string> bug_ids, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("corpus", "k must be positive");
  std::vector<std::string> bugs(bug_ids.begin(), bug_ids.end());
  std::sort(bugs.begin(), bugs.end());
  bugs.erase(std::unique(bugs.begin(), bugs.end()), bugs.end());
  if (bugs.size() < k) {
    throw Error("corpus",
                "only " + std::to_string(bugs.size()) + " distinct bugs for k=" + std::to_string(k),
                "lower k or add bugs");
  }
  Rng rng(seed);
  shuffle(bugs.begin(), bugs.end(), rng);

  FoldPlan plan;
  plan.groups.resize(k);
  for (std::size_t i = 0; i < bugs.size(); ++i) plan.groups[i % k].push_back(std::move(bugs[i]));
  return plan;
}

FoldPlan split_by_bug(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const auto bugs = corpus.distinct_bugs();
  return split_by_bug(std::span<const std::string>(bugs), k, seed);
}

}  // namespace patchclf
