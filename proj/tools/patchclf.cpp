// Command-line front end: one subcommand per pipeline stage.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchclf/combine.hpp"
#include "patchclf/corpus.hpp"
#include "patchclf/crossval.hpp"
#include "patchclf/embedding.hpp"
#include "patchclf/engineered.hpp"
#include "patchclf/error.hpp"
#include "patchclf/explain.hpp"
#include "patchclf/features.hpp"
#include "patchclf/filter.hpp"
#include "patchclf/paragraph_vector.hpp"
#include "patchclf/pipeline.hpp"
#include "patchclf/run_config.hpp"
#include "patchclf/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace patchclf;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// JSONL artifacts keep their record format; provenance goes to a sidecar.
void write_sidecar(const fs::path& artifact, const json& config, const json& extra = json::object()) {
  json meta = extra;
  meta["artifact"] = artifact.filename().string();
  meta["config"] = config;
  write_json(artifact.string() + ".meta.json", meta);
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("cli", path.string() + " does not parse: " + e.what());
  }
}

Corpus load_corpus(const fs::path& path, IngestMode mode = IngestMode::Training) {
  auto result = ingest(path, mode);
  if (!result.report.rejected.empty()) {
    std::cerr << "warning: " << result.report.rejected.size() << " malformed line(s) in " << path.string() << "\n";
  }
  return std::move(result.corpus);
}

FeatureMatrix labeled_rows(const FeatureMatrix& m) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.y(i) >= 0) rows.push_back(i);
  }
  if (rows.empty()) throw Error("cli", "feature file has no labeled rows");
  if (static_cast<Eigen::Index>(rows.size()) == m.rows()) return m;
  std::cerr << "warning: skipping " << m.rows() - static_cast<Eigen::Index>(rows.size()) << " unlabeled row(s)\n";
  return m.select_rows(rows);
}

FeatureMatrix load_features(const RunConfig& cfg, const std::string& which) {
  const auto learned = [&] { return read_csv(cfg.path_or(cfg.learned_features, "learned_features.csv")); };
  const auto engineered = [&] { return read_csv(cfg.path_or(cfg.engineered_features, "engineered_features.csv")); };
  if (which == "learned") return learned();
  if (which == "engineered") return engineered();
  if (which == "concat") return naive_concat(learned(), engineered());
  throw Error("cli", "unknown feature set '" + which + "'", "use learned|engineered|concat");
}

std::string verdicts_csv(const std::vector<Verdict>& verdicts, const json& config) {
  std::ostringstream out;
  out << "# " << config.dump() << "\n";
  out << "patch_id,score,label,predicted\n";
  for (const auto& v : verdicts) {
    out << v.patch_id << ',' << format_double(v.score) << ',' << to_string(v.label) << ','
        << (v.predicted_correct ? "correct" : "incorrect") << '\n';
  }
  return out.str();
}

std::string percent(const Metric& m) {
  if (!m.defined) return "undefined";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(1);
  s << 100.0 * m.value << "%";
  return s.str();
}

std::string fixed3(const Metric& m) {
  if (!m.defined) return "undefined";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << m.value;
  return s.str();
}

void print_summary(const std::string& title, const CrossvalReport& r) {
  std::cout << title << " (k=" << r.k << ", seed=" << r.seed << ", macro average)\n"
            << "  AUC " << fixed3(r.macro.auc) << "  F1 " << fixed3(r.macro.f1) << "  accuracy "
            << percent(r.macro.accuracy) << "  precision " << percent(r.macro.precision) << "  +Recall "
            << percent(r.macro.plus_recall) << "  -Recall " << percent(r.macro.minus_recall) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patchclf: static patch-correctness prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  app.add_option("--config", config_path, "Run configuration JSON (flags override it)");
  app.add_option("--out-dir", out_dir, "Output directory (default $PATCHCLF_OUTPUT_DIR or ./out)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--workers", workers, "Worker threads, 0 = hardware concurrency");

  std::optional<std::string> corpus_path, embeddings_path, model_path, features, learner, strategy, policy;
  std::optional<std::size_t> k;
  std::optional<double> threshold;

  auto add_corpus = [&](CLI::App* s) { s->add_option("--corpus", corpus_path, "Corpus JSONL"); };
  auto add_embeddings = [&](CLI::App* s) { s->add_option("--embeddings", embeddings_path, "Embeddings JSONL"); };
  auto add_features = [&](CLI::App* s) {
    s->add_option("--features", features, "Feature set: learned|engineered|concat");
  };
  auto add_learner = [&](CLI::App* s) { s->add_option("--learner", learner, "Learner: lr|nb|dt|rf|gbt|dnn"); };

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate, deduplicate and persist a JSONL corpus");
  std::string ingest_input;
  bool prediction_mode = false;
  ingest_cmd->add_option("--input", ingest_input, "Raw corpus JSONL")->required();
  ingest_cmd->add_flag("--prediction", prediction_mode, "Accept unlabeled records");
  add_corpus(ingest_cmd);

  // gen-synthetic
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a seeded synthetic corpus and provider embeddings");
  SyntheticConfig synth;
  std::string synth_mode = "learned";
  gen_cmd->add_option("--mode", synth_mode, "Signal placement: learned|engineered|xor|none")->capture_default_str();
  gen_cmd->add_option("--bugs", synth.bugs, "Number of bugs")->capture_default_str();
  gen_cmd->add_option("--patches-per-bug", synth.patches_per_bug, "Patches per bug")->capture_default_str();
  gen_cmd->add_option("--dim", synth.dim, "Provider embedding width")->capture_default_str();
  gen_cmd->add_option("--signal-dims", synth.signal_dims, "Embedding dimensions carrying the learned signal")->capture_default_str();
  add_corpus(gen_cmd);
  add_embeddings(gen_cmd);

  auto* fragments_cmd = app.add_subcommand("fragments", "Emit buggy/patched fragments as JSONL");
  add_corpus(fragments_cmd);

  auto* train_embedder_cmd = app.add_subcommand("train-embedder", "Train the paragraph-vector embedder");
  add_corpus(train_embedder_cmd);
  train_embedder_cmd->add_option("--model", model_path, "Output embedder JSON");

  auto* embed_cmd = app.add_subcommand("embed", "Embed fragments with a trained embedder");
  add_corpus(embed_cmd);
  add_embeddings(embed_cmd);
  embed_cmd->add_option("--model", model_path, "Embedder JSON");

  auto* import_cmd = app.add_subcommand("import-embeddings", "Validate externally computed embeddings");
  std::string import_input, provider = "imported";
  import_cmd->add_option("--input", import_input, "Embeddings JSONL {patch_id, buggy_vec, patched_vec}")->required();
  import_cmd->add_option("--provider", provider, "Provider name")->capture_default_str();
  add_embeddings(import_cmd);

  auto* features_cmd = app.add_subcommand("features", "Write crossed and engineered feature CSVs");
  add_corpus(features_cmd);
  add_embeddings(features_cmd);

  auto* stats_cmd = app.add_subcommand("stats", "Similarity distribution of correct patches");
  add_corpus(stats_cmd);
  add_embeddings(stats_cmd);

  auto* filter_cmd = app.add_subcommand("filter", "Filter patches by an inferred similarity threshold");
  std::string stats_path;
  add_corpus(filter_cmd);
  add_embeddings(filter_cmd);
  filter_cmd->add_option("--stats", stats_path, "stats.json from the stats subcommand (training corpus)");
  filter_cmd->add_option("--policy", policy, "Threshold statistic: q1|mean|median|fixed");
  filter_cmd->add_option("--threshold", threshold, "Threshold for --policy fixed");

  auto* top1_cmd = app.add_subcommand("top1", "Keep the most similar patch per bug");
  add_corpus(top1_cmd);
  add_embeddings(top1_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train one learner on a feature set");
  add_features(train_cmd);
  add_learner(train_cmd);
  train_cmd->add_option("--model", model_path, "Output model JSON");

  auto* crossval_cmd = app.add_subcommand("crossval", "Bug-disjoint k-group cross-validation");
  add_features(crossval_cmd);
  add_learner(crossval_cmd);
  crossval_cmd->add_option("--k", k, "Number of bug groups");

  auto* combine_cmd = app.add_subcommand("combine", "Cross-validate a combination of learned and engineered features");
  combine_cmd->add_option("--strategy", strategy, "ensemble|concat|fusion");
  add_learner(combine_cmd);
  combine_cmd->add_option("--k", k, "Number of bug groups");

  auto* explain_cmd = app.add_subcommand("explain", "Shapley explanations for a tree ensemble or logistic model");
  std::optional<std::string> interaction;
  add_features(explain_cmd);
  add_learner(explain_cmd);
  explain_cmd->add_option("--model", model_path, "Model JSON from train (trained on the fly when absent)");
  explain_cmd->add_option("--interaction", interaction, "Feature pair 'a,b' for interaction values");

  auto* compare_cmd = app.add_subcommand("compare", "Overlap of two out-of-fold prediction CSVs");
  std::string compare_a, compare_b;
  compare_cmd->add_option("--a", compare_a, "First prediction CSV")->required();
  compare_cmd->add_option("--b", compare_b, "Second prediction CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg;
    if (const char* env = std::getenv("PATCHCLF_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!config_path.empty()) merge(cfg, read_json(config_path));
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (k) cfg.k = *k;
    if (features) cfg.features = *features;
    if (learner) cfg.learner = *learner;
    if (strategy) cfg.strategy = *strategy;
    if (policy) cfg.threshold = *policy;
    if (threshold) cfg.fixed_threshold = *threshold;
    if (corpus_path) cfg.corpus = *corpus_path;
    if (embeddings_path) cfg.embeddings = *embeddings_path;
    if (model_path && (train_embedder_cmd->parsed() || embed_cmd->parsed())) cfg.embedder_model = *model_path;
    cfg.learners.workers = cfg.workers;

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    const auto corpus_file = cfg.path_or(cfg.corpus, "corpus.jsonl");
    const auto embeddings_file = cfg.path_or(cfg.embeddings, "embeddings.jsonl");
    json echo = cfg;

    if (ingest_cmd->parsed()) {
      auto result = ingest(ingest_input, prediction_mode ? IngestMode::Prediction : IngestMode::Training);
      result.corpus.provenance = fs::path(ingest_input).filename().string();
      persist(result.corpus, corpus_file);
      json rejected = json::array();
      for (const auto& r : result.report.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
      write_json(out / "ingest_report.json", {{"config", echo},
                                              {"ingested", result.report.ingested},
                                              {"duplicates", result.report.duplicates},
                                              {"rejected", rejected}});
      write_sidecar(corpus_file, echo);
      std::cout << "ingested " << result.report.ingested << " record(s), dropped " << result.report.duplicates
                << " duplicate(s), rejected " << result.report.rejected.size() << " line(s) -> "
                << corpus_file.string() << "\n";
    } else if (gen_cmd->parsed()) {
      synth.mode = parse_signal_mode(synth_mode);
      synth.seed = cfg.seed;
      const auto s = generate_synthetic(synth);
      const auto emb_file = cfg.path_or(cfg.embeddings, "synthetic_embeddings.jsonl");
      persist(s.corpus, corpus_file);
      export_embeddings(s.embeddings, emb_file);
      const json params = {{"mode", synth_mode},        {"bugs", synth.bugs},
                           {"patches_per_bug", synth.patches_per_bug}, {"dim", synth.dim},
                           {"signal_dims", synth.signal_dims},          {"seed", synth.seed}};
      write_sidecar(corpus_file, echo, {{"synthetic", params}});
      write_sidecar(emb_file, echo, {{"synthetic", params}});
      std::cout << "generated " << s.corpus.size() << " patches over " << synth.bugs << " bugs (mode " << synth_mode
                << ") -> " << corpus_file.string() << ", " << emb_file.string() << "\n";
    } else if (fragments_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file, IngestMode::Prediction);
      std::string text;
      for (const auto& f : corpus_fragments(corpus)) {
        text += json{{"patch_id", f.patch_id},
                     {"buggy_text", f.fragments.buggy_text},
                     {"patched_text", f.fragments.patched_text}}
                    .dump() +
                "\n";
      }
      const auto file = out / "fragments.jsonl";
      write_text(file, text);
      write_sidecar(file, echo);
      std::cout << "wrote fragments of " << corpus.size() << " patches -> " << file.string() << "\n";
    } else if (train_embedder_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file, IngestMode::Prediction);
      const auto model = ParagraphVectorModel::train(embedder_documents(corpus_fragments(corpus)), cfg.embedder);
      const auto file = cfg.path_or(cfg.embedder_model, "embedder.json");
      auto j = model.to_json();
      j["run_config"] = echo;
      write_text(file, j.dump() + "\n");
      std::cout << "trained embedder: " << model.vocabulary().size() << " tokens, dim " << cfg.embedder.dim
                << ", loss " << model.loss().initial << " -> " << model.loss().final << " -> " << file.string()
                << "\n";
    } else if (embed_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file, IngestMode::Prediction);
      const auto model = ParagraphVectorModel::load(cfg.path_or(cfg.embedder_model, "embedder.json"));
      const auto result = embed_fragments(model, corpus_fragments(corpus), cfg.workers);
      export_embeddings(result.pairs, embeddings_file);
      write_sidecar(embeddings_file, echo, {{"zero_vector_warnings", result.warnings}});
      std::cout << "embedded " << result.pairs.size() << " patches";
      if (result.warnings) std::cout << " (" << result.warnings << " fragment(s) had no known token)";
      std::cout << " -> " << embeddings_file.string() << "\n";
    } else if (import_cmd->parsed()) {
      const auto pairs = import_embeddings(import_input, provider);
      export_embeddings(pairs, embeddings_file);
      write_sidecar(embeddings_file, echo, {{"provider", provider}, {"n", pairs.front().n()}});
      std::cout << "imported " << pairs.size() << " pairs of dimension " << pairs.front().n() << " -> "
                << embeddings_file.string() << "\n";
    } else if (features_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file, IngestMode::Prediction);
      const auto pairs = import_embeddings(embeddings_file, "file");
      const auto learned = learned_features(corpus, pairs);
      const auto engineered = engineered_features(corpus, cfg.workers);
      const auto lf = cfg.path_or(cfg.learned_features, "learned_features.csv");
      const auto ef = cfg.path_or(cfg.engineered_features, "engineered_features.csv");
      write_csv(learned, lf, echo);
      write_csv(engineered, ef, echo);
      json registry = registry_to_json();
      write_json(out / "registry.json", {{"config", echo}, {"registry", registry}});
      std::cout << "wrote " << learned.rows() << " rows: " << learned.cols() << " crossed features -> " << lf.string()
                << ", " << engineered.cols() << " engineered features -> " << ef.string() << "\n";
    } else if (stats_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file);
      const auto scores = join_labels(corpus, score_corpus(import_embeddings(embeddings_file, "file")));
      std::vector<double> correct, incorrect;
      for (const auto& s : scores) (s.label == Label::Correct ? correct : incorrect).push_back(s.score);
      if (correct.empty()) throw Error("filter", "corpus has no correct patches to infer thresholds from");
      json j = {{"config", echo}, {"correct", to_json(stats(correct))}, {"correct_count", correct.size()}};
      if (!incorrect.empty()) j["incorrect"] = to_json(stats(incorrect));
      j["incorrect_count"] = incorrect.size();
      write_json(out / "stats.json", j);
      const auto s = stats(correct);
      std::cout << "correct-patch cosine: min " << s.min << " q1 " << s.q1 << " median " << s.median << " q3 "
                << s.q3 << " max " << s.max << " mean " << s.mean << " -> " << (out / "stats.json").string()
                << "\n";
    } else if (filter_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file);
      const auto scores = join_labels(corpus, score_corpus(import_embeddings(embeddings_file, "file")));
      const auto statistic = parse_threshold_statistic(cfg.threshold);
      SimilarityStats s;
      if (statistic != ThresholdStatistic::Fixed) {
        s = stats_from_json(read_json(stats_path.empty() ? out / "stats.json" : fs::path(stats_path)).at("correct"));
      }
      const auto policy = ThresholdPolicy::resolve(statistic, s, cfg.fixed_threshold);
      const auto result = filter_by_threshold(scores, policy);
      auto j = to_json(result);
      j["config"] = echo;
      write_json(out / "filter.json", j);
      write_text(out / "verdicts.csv", verdicts_csv(result.verdicts, echo));
      std::cout << "threshold " << policy.value << " (" << to_string(policy.statistic) << "): +CP " << result.plus_cp
                << "/" << result.correct_total << " (+Recall " << percent(result.plus_recall) << "), -IP "
                << result.minus_ip << "/" << result.incorrect_total << " (-Recall " << percent(result.minus_recall)
                << ")\n";
    } else if (top1_cmd->parsed()) {
      const auto corpus = load_corpus(corpus_file);
      const auto scores = join_labels(corpus, score_corpus(import_embeddings(embeddings_file, "file")));
      const auto result = top1_per_bug(scores);
      json bugs = json::array();
      for (const auto& b : result.bugs) {
        bugs.push_back({{"bug_id", b.bug_id},
                        {"selected_patch", b.selected_patch},
                        {"score", b.score},
                        {"selected_is_correct", b.selected_is_correct}});
      }
      write_json(out / "top1.json", {{"config", echo}, {"fraction_correct", result.fraction_correct}, {"bugs", bugs}});
      write_text(out / "top1.csv", verdicts_csv(result.verdicts, echo));
      std::cout << "top-1 selection is correct for " << result.fraction_correct * 100.0 << "% of "
                << result.bugs.size() << " bugs\n";
    } else if (train_cmd->parsed()) {
      const auto data = labeled_rows(load_features(cfg, cfg.features));
      const auto kind = parse_model_kind(cfg.learner);
      const auto model = train(kind, data, cfg.learners, cfg.seed);
      auto j = model.to_json();
      j["feature_names"] = data.names;
      j["feature_set"] = cfg.features;
      j["run_config"] = echo;
      const fs::path file = model_path ? fs::path(*model_path) : out / ("model_" + cfg.features + "_" + cfg.learner + ".json");
      write_text(file, j.dump() + "\n");
      std::cout << "trained " << cfg.learner << " on " << data.rows() << " rows x " << data.cols() << " "
                << cfg.features << " features -> " << file.string() << "\n";
    } else if (crossval_cmd->parsed()) {
      const auto data = labeled_rows(load_features(cfg, cfg.features));
      const auto report = crossval(data, parse_model_kind(cfg.learner), cfg.learners, cfg.k, cfg.seed, cfg.workers);
      auto j = to_json(report);
      j["config"] = echo;
      j["features"] = cfg.features;
      j["learner"] = cfg.learner;
      const std::string tag = cfg.features + "_" + cfg.learner;
      write_json(out / ("crossval_" + tag + ".json"), j);
      write_oof_csv(report.oof, out / ("oof_" + tag + ".csv"), echo);
      print_summary("crossval " + tag, report);
    } else if (combine_cmd->parsed()) {
      const auto learned = labeled_rows(read_csv(cfg.path_or(cfg.learned_features, "learned_features.csv")));
      const auto engineered = labeled_rows(read_csv(cfg.path_or(cfg.engineered_features, "engineered_features.csv")));
      const auto joint = naive_concat(learned, engineered);  // aligns rows and checks coverage
      FeatureMatrix eng_aligned = joint;
      std::vector<std::string> eng_names(joint.names.begin() + learned.cols(), joint.names.end());
      eng_aligned.names = eng_names;
      eng_aligned.X = joint.X.rightCols(engineered.cols());
      const auto strat = parse_strategy(cfg.strategy);
      const auto report = crossval(learned, eng_aligned, strat, parse_model_kind(cfg.learner), cfg.learners,
                                   cfg.fusion, cfg.k, cfg.seed, cfg.workers);
      auto j = to_json(report);
      j["config"] = echo;
      j["strategy"] = cfg.strategy;
      j["learner"] = strat == Strategy::DeepFusion ? "fusion" : cfg.learner;
      const std::string tag = cfg.strategy + (strat == Strategy::DeepFusion ? "" : "_" + cfg.learner);
      write_json(out / ("combine_" + tag + ".json"), j);
      write_oof_csv(report.oof, out / ("oof_combine_" + tag + ".csv"), echo);
      print_summary("combine " + tag, report);
    } else if (explain_cmd->parsed()) {
      const auto data = labeled_rows(load_features(cfg, cfg.features));
      std::optional<TrainedModel> model;
      if (model_path) {
        const auto j = read_json(*model_path);
        model = TrainedModel::from_json(j);
        if (j.contains("feature_names") && j["feature_names"].get<std::vector<std::string>>() != data.names) {
          throw Error("explain", "model was trained on a different feature set", "pass the matching --features");
        }
      } else {
        model = train(parse_model_kind(cfg.learner), data, cfg.learners, cfg.seed);
      }
      const Eigen::MatrixXd background = subsample_rows(data.X, cfg.background_cap, mix_seed(cfg.seed, 0x5a));
      const Explainer explainer(*model, background);
      std::vector<ShapExplanation> explanations;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const Eigen::VectorXd x = data.X.row(i).transpose();
        explanations.push_back(explainer.explain(x, data.patch_ids[static_cast<std::size_t>(i)]));
        const auto& e = explanations.back();
        worst = std::max(worst, std::abs(e.base_value + e.contributions.sum() - e.model_output));
      }
      const auto ranked = global_importance(explanations, data.names);
      const std::string kind_name(short_name(model->kind()));
      const std::string tag = cfg.features + "_" + kind_name;
      write_text(out / ("explanations_" + tag + ".csv"), explanations_to_csv(explanations, data.names, echo));

      json ranking = json::array();
      for (const auto& r : ranked) ranking.push_back({{"feature", r.name}, {"mean_abs_contribution", r.importance}});
      std::size_t a = 0, b = 1;
      auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < data.names.size(); ++i) {
          if (data.names[i] == name) return i;
        }
        throw Error("explain", "unknown feature '" + name + "'");
      };
      if (interaction) {
        const auto comma = interaction->find(',');
        if (comma == std::string::npos) throw Error("explain", "--interaction expects 'a,b'");
        a = index_of(interaction->substr(0, comma));
        b = index_of(interaction->substr(comma + 1));
      } else if (ranked.size() >= 2) {
        a = index_of(ranked[0].name);
        b = index_of(ranked[1].name);
      }
      json interactions = json::array();
      if (data.cols() >= 2) {
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
          const Eigen::VectorXd x = data.X.row(i).transpose();
          interactions.push_back({{"patch_id", data.patch_ids[static_cast<std::size_t>(i)]},
                                  {"value", explainer.interaction(x, static_cast<int>(a), static_cast<int>(b))}});
        }
      }
      const auto top = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), ranked.size());
      json top_features = json::array();
      for (std::size_t i = 0; i < top; ++i) top_features.push_back(ranked[i].name);
      write_json(out / ("importance_" + tag + ".json"),
                 {{"config", echo},
                  {"learner", kind_name},
                  {"features", cfg.features},
                  {"space", explainer.space()},
                  {"base_value", explainer.base_value()},
                  {"background_rows", background.rows()},
                  {"max_additivity_error", worst},
                  {"top_features", top_features},
                  {"ranking", ranking},
                  {"interaction", {{"a", data.names[a]}, {"b", data.names[b]}, {"values", interactions}}}});

      json plot = json::object();
      for (std::size_t t = 0; t < top; ++t) {
        const auto f = static_cast<Eigen::Index>(index_of(ranked[t].name));
        json points = json::array();
        for (std::size_t i = 0; i < explanations.size(); ++i) {
          points.push_back({data.X(static_cast<Eigen::Index>(i), f), explanations[i].contributions(f)});
        }
        plot[ranked[t].name] = points;
      }
      write_json(out / ("plot_data_" + tag + ".json"),
                 {{"config", echo}, {"space", explainer.space()}, {"columns", {"feature_value", "contribution"}},
                  {"features", plot}});
      std::cout << "explained " << explanations.size() << " patches (" << explainer.space()
                << " space, base " << explainer.base_value() << ", max additivity error " << worst << ")\n";
      for (std::size_t i = 0; i < top; ++i) {
        std::cout << "  " << i + 1 << ". " << ranked[i].name << "  " << ranked[i].importance << "\n";
      }
    } else if (compare_cmd->parsed()) {
      const auto c = compare(read_oof_csv(compare_a), read_oof_csv(compare_b));
      auto j = to_json(c);
      j["config"] = echo;
      j["a"] = compare_a;
      j["b"] = compare_b;
      write_json(out / "compare.json", j);
      std::cout << "correct patches identified: both " << c.correct_patches.both << ", only a "
                << c.correct_patches.only_a << ", only b " << c.correct_patches.only_b << ", neither "
                << c.correct_patches.neither << "\n"
                << "incorrect patches filtered: both " << c.incorrect_patches.both << ", only a "
                << c.incorrect_patches.only_a << ", only b " << c.incorrect_patches.only_b << ", neither "
                << c.incorrect_patches.neither << "\n";
    }
  } catch (const Error& e) {
    std::string message = e.what();
    if (message.rfind(e.module() + ": ", 0) == 0) message.erase(0, e.module().size() + 2);
    std::cerr << "error [" << e.module() << "]: " << message << "\n";
    if (!e.hint().empty()) std::cerr << "hint: " << e.hint() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
