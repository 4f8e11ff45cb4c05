#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "patchclf/error.hpp"
#include "patchclf/run_config.hpp"

using namespace patchclf;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PATCHCLF_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("patchclf_cfg_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults and merge") {
  RunConfig c;
  CHECK(c.seed == 42);
  CHECK(c.k == 10);
  merge(c, {{"seed", 7}, {"learners", {{"gbt", {{"rounds", 5}}}}}, {"fusion", {{"epochs", 3}}}});
  CHECK(c.seed == 7);
  CHECK(c.learners.boosting.rounds == 5);
  CHECK(c.learners.boosting.learning_rate == 0.1);
  CHECK(c.fusion.epochs == 3);
  CHECK(c.fusion.learned_width == 32);
  CHECK_THROWS_AS(merge(c, {{"sede", 1}}), Error);
  CHECK_THROWS_AS(merge(c, {{"learners", {{"boosting", {{"rounds", 5}}}}}}), Error);
  CHECK_THROWS_AS(merge(c, {{"fusion", {{"width", 5}}}}), Error);
  CHECK_THROWS_AS(merge(c, {{"seed", "x"}}), Error);
}

TEST_CASE("echoed configuration reloads to itself") {
  RunConfig c;
  merge(c, {{"k", 5}, {"strategy", "fusion"}, {"paths", {{"output_dir", "elsewhere"}}}});
  nlohmann::json echoed = c;
  RunConfig d;
  merge(d, echoed);
  CHECK(nlohmann::json(d) == echoed);
  CHECK(d.path_or("", "corpus.jsonl") == fs::path("elsewhere") / "corpus.jsonl");
  CHECK(d.path_or("x.jsonl", "corpus.jsonl") == fs::path("x.jsonl"));
}

TEST_CASE("shipped default configuration loads") {
  const auto c = load_run_config(fs::path(PATCHCLF_SOURCE_DIR) / "configs" / "default.json");
  CHECK(nlohmann::json(c) == nlohmann::json(RunConfig{}));
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch("exit");
  CHECK(run("--help") == 0);
  CHECK(run("--out-dir " + dir.string() + " ingest --input " + (dir / "missing.jsonl").string()) == 2);
  std::ofstream(dir / "bad.jsonl") << "{\"patch_id\": 1}\n";
  CHECK(run("--out-dir " + dir.string() + " ingest --input " + (dir / "bad.jsonl").string()) == 2);
  std::ofstream(dir / "cfg.json") << "{\"unknown\": 1}\n";
  CHECK(run("--config " + (dir / "cfg.json").string() + " --out-dir " + dir.string() + " gen-synthetic") == 2);
  CHECK(run("--out-dir " + dir.string() + " gen-synthetic --bugs 4") == 0);
  CHECK(fs::exists(dir / "corpus.jsonl"));
  CHECK(run("--out-dir " + dir.string() + " crossval --learner svm") == 2);
  fs::remove_all(dir);
}
