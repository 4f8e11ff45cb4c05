#include "patchclf/synthetic.hpp"

#include <array>
#include <string>

#include "patchclf/error.hpp"
#include "patchclf/random.hpp"

namespace patchclf {

std::string_view to_string(SignalMode m) {
  switch (m) {
    case SignalMode::Learned: return "learned";
    case SignalMode::Engineered: return "engineered";
    case SignalMode::Xor: return "xor";
    case SignalMode::None: return "none";
  }
  return "?";
}

SignalMode parse_signal_mode(std::string_view text) {
  for (auto m : {SignalMode::Learned, SignalMode::Engineered, SignalMode::Xor, SignalMode::None}) {
    if (text == to_string(m)) return m;
  }
  throw Error("corpus", "unknown signal mode '" + std::string(text) + "'", "use learned|engineered|xor|none");
}

namespace {

constexpr std::array<const char*, 5> kProjects = {"Chart", "Lang", "Math", "Time", "Closure"};
constexpr std::array<const char*, 5> kTools = {"developer", "jGenProg", "Nopol", "SimFix", "TBar"};
constexpr std::array<const char*, 8> kContext = {
    "int n = items.size();",      "String name = node.getName();", "log.debug(message);",
    "result = cache.get(key);",   "count++;",                      "buffer.append(value);",
    "index = offset * 2;",        "total = total + weight;"};
constexpr std::array<const char*, 4> kStatements = {"update(state, value);", "list.add(entry);",
                                                    "flag = check(item);", "queue.push(task);"};
constexpr std::array<const char*, 3> kNeutral = {"val", "res", "out"};
constexpr std::array<const char*, 3> kPositive = {"acc", "sum", "tally"};
constexpr std::array<const char*, 3> kNegative = {"tmp", "aux", "buf"};

template <typename A>
const char* pick(const A& pool, Rng& rng) {
  return pool[uniform_index(rng, pool.size())];
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  if (config.bugs < 1 || config.patches_per_bug < 1) throw Error("corpus", "need at least one bug and one patch");
  if (config.dim < config.signal_dims || config.signal_dims < 1) throw Error("corpus", "signal_dims must fit in dim");
  Rng rng(config.seed);
  SyntheticCorpus out;
  out.corpus.provenance = "synthetic mode=" + std::string(to_string(config.mode)) +
                          " seed=" + std::to_string(config.seed);
  int serial = 0;
  for (int b = 0; b < config.bugs; ++b) {
    const std::string project = kProjects[static_cast<std::size_t>(b) % kProjects.size()];
    const std::string bug_id = project + "-" + std::to_string(b + 1);
    for (int p = 0; p < config.patches_per_bug; ++p, ++serial) {
      const int s1 = uniform01(rng) < 0.5 ? 1 : 0;
      const int s2 = uniform01(rng) < 0.5 ? 1 : 0;
      int label = 0;
      switch (config.mode) {
        case SignalMode::Learned: label = s1; break;
        case SignalMode::Engineered: label = s2; break;
        case SignalMode::Xor: label = s1 ^ s2; break;
        case SignalMode::None: label = uniform01(rng) < 0.5 ? 1 : 0; break;
      }

      const std::string k = std::to_string(uniform_index(rng, 10));
      const std::string ctx1 = pick(kContext, rng);
      const std::string ctx2 = pick(kContext, rng);
      const std::string ctx3 = pick(kContext, rng);
      const std::string stmt = pick(kStatements, rng);
      const std::string old_sig = std::string(pick(kNeutral, rng)) + "_" + k + " = compute(a, b);";
      const std::string new_sig =
          std::string(s1 ? pick(kPositive, rng) : pick(kNegative, rng)) + "_" + k + " = compute(b, a);";

      const std::string tool = kTools[static_cast<std::size_t>(p) % kTools.size()];
      const std::string file = "src/" + project + "/Unit" + std::to_string(b + 1) + ".java";
      const int start = 10 + 7 * serial;
      std::string diff = "--- a/" + file + "\n+++ b/" + file + "\n@@ -" + std::to_string(start) + ",5 +" +
                         std::to_string(start) + ",5 @@\n";
      if (s2) {
        diff += "     " + ctx1 + "\n-    " + stmt + "\n     " + ctx2 + "\n-    " + old_sig + "\n+    " + new_sig +
                "\n+    " + stmt + "\n     " + ctx3 + "\n";
      } else {
        diff += "     " + ctx1 + "\n     " + ctx2 + "\n-    " + stmt + "\n-    " + old_sig + "\n+    " + stmt +
                "\n+    " + new_sig + "\n     " + ctx3 + "\n";
      }

      PatchRecord r;
      r.patch_id = bug_id + "_" + tool + (p >= static_cast<int>(kTools.size()) ? "_" + std::to_string(p) : "");
      r.bug_id = bug_id;
      r.project = project;
      r.tool = tool;
      r.label = label ? Label::Correct : Label::Incorrect;
      r.diff_text = std::move(diff);

      EmbeddingPair e;
      e.patch_id = r.patch_id;
      e.provider = "synthetic";
      e.buggy.resize(config.dim);
      e.patched.resize(config.dim);
      for (int d = 0; d < config.dim; ++d) e.buggy(d) = normal(rng);
      for (int d = 0; d < config.dim; ++d) e.patched(d) = e.buggy(d) + normal(rng, 0.0, config.noise);
      for (int d = 0; d < config.signal_dims; ++d) e.patched(d) += s1 ? config.signal : -config.signal;

      out.corpus.records.push_back(std::move(r));
      out.embeddings.push_back(std::move(e));
      out.learned_signal.push_back(s1);
      out.engineered_signal.push_back(s2);
    }
  }
  return out;
}

}  // namespace patchclf
