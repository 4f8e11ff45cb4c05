#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchclf {

enum class Label { Correct, Incorrect, Unlabeled };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

/// One labeled patch. Multi-file developer patches are expected to arrive
/// pre-split, one record per changed file.
struct PatchRecord {
  std::string patch_id;
  std::string bug_id;
  std::string project;
  std::string tool;
  Label label = Label::Unlabeled;
  std::string diff_text;

  bool operator==(const PatchRecord&) const = default;
};

struct Corpus {
  std::vector<PatchRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  std::vector<std::string> distinct_bugs() const;
};

enum class IngestMode { Training, Prediction };

struct Rejection {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::size_t ingested = 0;
  std::size_t duplicates = 0;
  std::vector<Rejection> rejected;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

/// Line-ending and trailing-whitespace normalization used for the
/// (bug_id, diff) deduplication key.
std::string normalize_diff(std::string_view diff);

/// Reads a JSONL corpus. Malformed lines are rejected individually; a file
/// with no valid record throws.
IngestResult ingest(const std::filesystem::path& path, IngestMode mode = IngestMode::Training);
IngestResult ingest_lines(std::string_view text, IngestMode mode = IngestMode::Training,
                          std::string provenance = {});

void persist(const Corpus& corpus, const std::filesystem::path& path);
std::string to_jsonl(const Corpus& corpus);

/// k disjoint groups of bug ids; every bug lands in exactly one group.
struct FoldPlan {
  std::vector<std::vector<std::string>> groups;

  std::size_t k() const { return groups.size(); }
  /// Group index of `bug_id`, or -1 when absent.
  int group_of(std::string_view bug_id) const;
};

FoldPlan split_by_bug(const Corpus& corpus, std::size_t k, std::uint64_t seed);
FoldPlan split_by_bug(std::span<const std::string> bug_ids, std::size_t k, std::uint64_t seed);

}  // namespace patchclf
