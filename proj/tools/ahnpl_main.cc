// Copyright 2026 The ahnpl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ahnpl command-line tool.
//
//   ahnpl gen-data        synthetic train corpus, features, benchmark, lexicon
//   ahnpl gen-negatives   textual hard negatives for a corpus
//   ahnpl train           train the dual encoder, write checkpoint and metrics
//   ahnpl eval            binary-choice accuracy of a checkpoint
//   ahnpl gradcheck       analytic vs finite-difference gradients per loss term
//   ahnpl distance-report cosine distances among image/text/negative embeddings
//
// Exit codes: 0 success, 1 validation or I/O error, 2 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ahnpl/config.h"
#include "ahnpl/embedding.h"
#include "ahnpl/encoders.h"
#include "ahnpl/eval_harness.h"
#include "ahnpl/gradient_check.h"
#include "ahnpl/losses.h"
#include "ahnpl/negative_textgen.h"
#include "ahnpl/synthetic_data.h"
#include "ahnpl/trainer.h"
#include "glog/logging.h"
#include "manifest.h"

namespace ahnpl {
namespace {

namespace fs = std::filesystem;

int ExitCode(const absl::Status& status) {
  if (status.ok()) return 0;
  std::fprintf(stderr, "error: %s\n", std::string(status.message()).c_str());
  return status.code() == absl::StatusCode::kInternal ? 2 : 1;
}

#define RETURN_IF_ERROR(expr)                      \
  do {                                             \
    if (absl::Status s_ = (expr); !s_.ok()) return s_; \
  } while (0)

#define ASSIGN_OR_RETURN(lhs, expr)               \
  auto lhs##_or = (expr);                         \
  if (!lhs##_or.ok()) return lhs##_or.status();   \
  auto lhs = *std::move(lhs##_or)

absl::Status MakeDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::UnavailableError(absl::StrCat("cannot create ", dir));
  return absl::OkStatus();
}

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << text;
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

struct ConfigFlags {
  std::string config_path;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "Preset: desk or paper-mscoco")
        ->capture_default_str();
    app->add_option("--seed", seed, "Overrides the config seed");
  }

  absl::StatusOr<TrainConfig> Resolve() const {
    absl::StatusOr<TrainConfig> config = config_path.empty()
                                             ? PresetByName(preset)
                                             : LoadConfigFile(config_path);
    if (!config.ok()) return config.status();
    if (seed) config->seed = *seed;
    RETURN_IF_ERROR(config->Validate());
    return config;
  }
};

std::vector<std::string> Argv(int argc, char** argv) {
  return std::vector<std::string>(argv, argv + argc);
}

// gen-data

struct GenDataFlags {
  ConfigFlags config;
  std::string out_dir;
};

absl::Status GenData(const GenDataFlags& flags,
                     const std::vector<std::string>& argv) {
  ASSIGN_OR_RETURN(config, flags.config.Resolve());
  ASSIGN_OR_RETURN(data, GenerateDataset(config));
  RETURN_IF_ERROR(MakeDir(flags.out_dir));
  const std::string train = Join(flags.out_dir, "train.tsv");
  const std::string bench = Join(flags.out_dir, "benchmark.tsv");
  const std::string lexicon = Join(flags.out_dir, "lexicon.tsv");
  RETURN_IF_ERROR(WriteTrainPairs(train, data.pairs));
  RETURN_IF_ERROR(WriteBenchmark(bench, data.benchmark));
  RETURN_IF_ERROR(SceneLexicon(config.data.sizes).Save(lexicon));

  RunManifest manifest;
  manifest.command = "gen-data";
  manifest.args = argv;
  manifest.seed = config.seed;
  manifest.config = config.ToJson();
  for (const std::string& p : {train, FeaturePathFor(train), bench,
                               FeaturePathFor(bench), lexicon}) {
    RETURN_IF_ERROR(manifest.AddOutput(p));
  }
  RETURN_IF_ERROR(manifest.Write(Join(flags.out_dir, "manifest.json")));
  std::printf("train_pairs\t%zu\nbenchmark_items\t%zu\n", data.pairs.size(),
              data.benchmark.size());
  return absl::OkStatus();
}

// gen-negatives

struct GenNegativesFlags {
  std::string corpus;
  std::string lexicon;
  int k = 2;
  std::uint64_t seed = 1;
  std::string out;
};

absl::Status GenNegatives(const GenNegativesFlags& flags,
                          const std::vector<std::string>& argv) {
  if (flags.k < 1) return absl::InvalidArgumentError("--k must be >= 1");
  ASSIGN_OR_RETURN(corpus, ReadCorpus(flags.corpus));
  ASSIGN_OR_RETURN(lexicon, PosLexicon::Load(flags.lexicon));
  RETURN_IF_ERROR(lexicon.Validate());
  int skipped = 0;
  ASSIGN_OR_RETURN(sets,
                   GenerateNegatives(corpus, lexicon, flags.k, flags.seed,
                                     &skipped));
  RETURN_IF_ERROR(WriteNegativeCorpus(flags.out, sets));

  std::map<NegativeKind, int> counts = {{NegativeKind::kNounSwap, 0},
                                        {NegativeKind::kSubstitution, 0}};
  for (const TextualNegativeSet& s : sets) {
    for (const TextualNegative& n : s.negatives) ++counts[n.kind];
  }
  RunManifest manifest;
  manifest.command = "gen-negatives";
  manifest.args = argv;
  manifest.seed = flags.seed;
  manifest.config = {{"k_per_kind", flags.k}};
  RETURN_IF_ERROR(manifest.AddInput(flags.corpus));
  RETURN_IF_ERROR(manifest.AddInput(flags.lexicon));
  RETURN_IF_ERROR(manifest.AddOutput(flags.out));
  RETURN_IF_ERROR(manifest.Write(flags.out + ".manifest.json"));

  std::printf("captions\t%zu\n", corpus.size());
  for (const auto& [kind, count] : counts) {
    std::printf("%s\t%d\n", NegativeKindName(kind).c_str(), count);
  }
  std::printf("skipped\t%d\n", skipped);
  return absl::OkStatus();
}

// Shared loaders for train / eval / distance-report.

absl::StatusOr<std::vector<RawSample>> ReadTrainSamples(
    const std::string& corpus_path) {
  ASSIGN_OR_RETURN(corpus, ReadCorpus(corpus_path));
  ASSIGN_OR_RETURN(features, ReadEmbeddingFile(FeaturePathFor(corpus_path)));
  std::map<std::string, const EmbeddingRecord*> by_id;
  for (const EmbeddingRecord& r : features) by_id[r.id] = &r;
  std::vector<RawSample> raw;
  for (const CorpusLine& line : corpus) {
    auto it = by_id.find(line.id);
    if (it == by_id.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("no features for corpus id ", line.id));
    }
    raw.push_back({line.id, line.tokens, it->second->vector.vector()});
  }
  return raw;
}

// train

struct TrainFlags {
  ConfigFlags config;
  std::string corpus;
  std::string negatives;
  std::string lexicon;
  std::string benchmark;
  std::string out_dir;
  bool no_negatives = false;
  bool no_mhnl = false;
  bool no_dmcl = false;
};

absl::Status RunTrain(const TrainFlags& flags,
                      const std::vector<std::string>& argv) {
  ASSIGN_OR_RETURN(config, flags.config.Resolve());
  if (flags.no_negatives) config.switches.use_negatives = false;
  if (flags.no_mhnl) config.switches.use_mhnl = false;
  if (flags.no_dmcl) config.switches.use_dmcl = false;
  RETURN_IF_ERROR(config.Validate());

  ASSIGN_OR_RETURN(lexicon, PosLexicon::Load(flags.lexicon));
  ASSIGN_OR_RETURN(raw, ReadTrainSamples(flags.corpus));
  if (raw.empty()) return absl::InvalidArgumentError("empty corpus");
  ASSIGN_OR_RETURN(sets, ReadNegativeCorpus(flags.negatives, lexicon));
  std::vector<ChoiceItem> benchmark;
  if (!flags.benchmark.empty()) {
    ASSIGN_OR_RETURN(items, ReadBenchmark(flags.benchmark, &lexicon));
    benchmark = std::move(items);
  }

  std::vector<std::vector<std::string>> captions;
  for (const RawSample& r : raw) captions.push_back(r.tokens);
  for (const TextualNegativeSet& s : sets) {
    for (const TextualNegative& n : s.negatives) {
      captions.push_back(n.caption.tokens);
    }
  }
  for (const ChoiceItem& item : benchmark) {
    captions.push_back(item.positive.tokens);
    captions.push_back(item.negative.tokens);
  }
  const Vocabulary vocab = BuildVocabulary(captions);
  Rng pad = MakeStream(config.seed, "negatives");
  ASSIGN_OR_RETURN(prepared, PrepareSamples(raw, sets, vocab,
                                            config.negatives_per_sample, pad));
  if (prepared.samples.empty()) {
    return absl::InvalidArgumentError("no sample has any negative");
  }
  const int feature_dim = static_cast<int>(raw.front().features.size());
  ASSIGN_OR_RETURN(result, Train(config, prepared.samples, vocab,
                                 feature_dim, benchmark));

  RETURN_IF_ERROR(MakeDir(flags.out_dir));
  const std::string ckpt = Join(flags.out_dir, "checkpoint.ckpt");
  const std::string metrics = Join(flags.out_dir, "metrics.csv");
  const std::string report = Join(flags.out_dir, "report.json");
  const std::string config_out = Join(flags.out_dir, "config.json");
  RETURN_IF_ERROR(SaveCheckpoint(ckpt, result.checkpoint));
  RETURN_IF_ERROR(WriteMetricsCsv(metrics, result.report));
  RETURN_IF_ERROR(WriteText(report, result.report.ToJson().dump(2) + "\n"));
  RETURN_IF_ERROR(WriteText(config_out, config.ToJson().dump(2) + "\n"));

  RunManifest manifest;
  manifest.command = "train";
  manifest.args = argv;
  manifest.seed = config.seed;
  manifest.config = config.ToJson();
  std::vector<std::string> inputs = {flags.corpus, FeaturePathFor(flags.corpus),
                                     flags.negatives, flags.lexicon};
  if (!flags.benchmark.empty()) {
    inputs.push_back(flags.benchmark);
    inputs.push_back(FeaturePathFor(flags.benchmark));
  }
  for (const std::string& p : inputs) RETURN_IF_ERROR(manifest.AddInput(p));
  for (const std::string& p : {ckpt, metrics, report, config_out}) {
    RETURN_IF_ERROR(manifest.AddOutput(p));
  }
  RETURN_IF_ERROR(manifest.Write(Join(flags.out_dir, "manifest.json")));

  std::printf("samples\t%zu\ndropped\t%d\npadded\t%d\nsteps\t%zu\n",
              prepared.samples.size(), prepared.dropped, prepared.padded,
              result.report.history.size());
  if (!result.report.history.empty()) {
    const StepRecord& last = result.report.history.back();
    std::printf("final_loss\t%s\nfinal_a\t%s\n",
                FormatReal(last.l_total).c_str(), FormatReal(last.a).c_str());
  }
  if (!result.report.evals.empty()) {
    std::printf("final_accuracy\t%s\n",
                FormatReal(result.report.evals.back().accuracy).c_str());
  }
  std::printf("checkpoint_id\t%s\n", result.report.checkpoint_id.c_str());
  return absl::OkStatus();
}

// eval

struct EvalFlags {
  std::string checkpoint;
  std::string benchmark;
  std::string lexicon;
  std::string out;
  std::string items;
};

absl::Status RunEval(const EvalFlags& flags,
                     const std::vector<std::string>& argv) {
  ASSIGN_OR_RETURN(ckpt, LoadCheckpoint(flags.checkpoint));
  std::optional<PosLexicon> lexicon;
  if (!flags.lexicon.empty()) {
    ASSIGN_OR_RETURN(lex, PosLexicon::Load(flags.lexicon));
    lexicon = std::move(lex);
  }
  ASSIGN_OR_RETURN(items, ReadBenchmark(flags.benchmark,
                                        lexicon ? &*lexicon : nullptr));
  ASSIGN_OR_RETURN(report, EvaluateChoice(ckpt.params, ckpt.vocab, items));
  for (const CategoryAccuracy& c : report.categories) {
    std::printf("%s\t%d\t%s\n", c.category.c_str(), c.count,
                FormatReal(c.accuracy).c_str());
  }
  std::printf("ALL\t%d\t%s\n", report.total,
              FormatReal(report.overall_accuracy).c_str());
  if (flags.out.empty()) return absl::OkStatus();

  RETURN_IF_ERROR(WriteEvalCsv(flags.out, report));
  RunManifest manifest;
  manifest.command = "eval";
  manifest.args = argv;
  RETURN_IF_ERROR(manifest.AddInput(flags.checkpoint));
  RETURN_IF_ERROR(manifest.AddInput(flags.benchmark));
  RETURN_IF_ERROR(manifest.AddInput(FeaturePathFor(flags.benchmark)));
  RETURN_IF_ERROR(manifest.AddOutput(flags.out));
  if (!flags.items.empty()) {
    RETURN_IF_ERROR(WriteItemTsv(flags.items, report));
    RETURN_IF_ERROR(manifest.AddOutput(flags.items));
  }
  return manifest.Write(flags.out + ".manifest.json");
}

// gradcheck

struct GradCheckFlags {
  std::string variant = "position";
  std::uint64_t seed = 1;
  double epsilon = GradCheckOptions().epsilon;
  double tolerance = GradCheckOptions().tolerance;
  double corrupt = 0.0;
  int n = 4;
  int k = 2;
  int dim = 8;
  std::string out;
};

absl::Status RunGradCheck(const GradCheckFlags& flags,
                          const std::vector<std::string>& argv) {
  if (flags.n < 1 || flags.k < 1 || flags.dim < 1) {
    return absl::InvalidArgumentError("--n, --k and --dim must be >= 1");
  }
  ASSIGN_OR_RETURN(variant, ParseVariant(flags.variant));
  GradCheckFixture fixture =
      MakeGradCheckFixture(variant, flags.n, flags.k, flags.dim, flags.seed);
  GradCheckOptions options;
  options.epsilon = flags.epsilon;
  options.tolerance = flags.tolerance;
  options.seed = flags.seed;
  options.corruption = flags.corrupt;

  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  bool all_passed = true;
  std::printf("term\tchecked\tkinks\tmax_rel_error\tworst\tresult\n");
  for (LossTerm term : AllLossTerms()) {
    ASSIGN_OR_RETURN(report,
                     FiniteDifferenceCheck(term, fixture.params, fixture.state,
                                           fixture.samples, options));
    all_passed &= report.passed;
    std::printf("%s\t%zu\t%zu\t%s\t%s\t%s\n", report.term.c_str(),
                report.checked, report.kinks,
                absl::StrFormat("%.3e", report.max_rel_error).c_str(),
                report.worst_coordinate.empty()
                    ? "-"
                    : report.worst_coordinate.c_str(),
                report.passed ? "PASS" : "FAIL");
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const GroupGradient& g : report.groups) {
      groups.push_back({{"group", g.group},
                        {"coordinates", g.coordinates},
                        {"max_abs_gradient", g.max_abs_gradient}});
    }
    results.push_back({{"term", report.term},
                       {"checked", report.checked},
                       {"kinks", report.kinks},
                       {"max_rel_error", report.max_rel_error},
                       {"worst_coordinate", report.worst_coordinate},
                       {"passed", report.passed},
                       {"groups", groups}});
  }
  if (!flags.out.empty()) {
    nlohmann::ordered_json doc = {{"variant", flags.variant},
                                  {"seed", flags.seed},
                                  {"n", flags.n},
                                  {"k", flags.k},
                                  {"dim", flags.dim},
                                  {"epsilon", flags.epsilon},
                                  {"tolerance", flags.tolerance},
                                  {"corruption", flags.corrupt},
                                  {"terms", results}};
    RETURN_IF_ERROR(WriteText(flags.out, doc.dump(2) + "\n"));
    RunManifest manifest;
    manifest.command = "gradcheck";
    manifest.args = argv;
    manifest.seed = flags.seed;
    manifest.config = doc;
    manifest.config.erase("terms");
    RETURN_IF_ERROR(manifest.AddOutput(flags.out));
    RETURN_IF_ERROR(manifest.Write(flags.out + ".manifest.json"));
  }
  if (!all_passed) {
    return absl::InternalError("gradient check failed for at least one term");
  }
  return absl::OkStatus();
}

// distance-report

struct DistanceFlags {
  std::string checkpoint;
  std::string examples;
  std::string out;
  std::string vectors;
};

absl::Status RunDistanceReport(const DistanceFlags& flags,
                               const std::vector<std::string>& argv) {
  ASSIGN_OR_RETURN(ckpt, LoadCheckpoint(flags.checkpoint));
  ASSIGN_OR_RETURN(items, ReadBenchmark(flags.examples, nullptr));
  ASSIGN_OR_RETURN(rows, DistanceReport(ckpt.params, ckpt.vocab, items));
  const DistanceRow mean = MeanDistances(rows);
  std::printf("pair\tmean_distance\n");
  const std::pair<const char*, double> columns[] = {
      {"image_text", mean.image_text},
      {"image_negative_text", mean.image_negative_text},
      {"image_negative_image", mean.image_negative_image},
      {"text_negative_text", mean.text_negative_text},
      {"text_negative_image", mean.text_negative_image},
      {"negative_text_negative_image", mean.negative_text_negative_image}};
  for (const auto& [name, value] : columns) {
    std::printf("%s\t%s\n", name, FormatReal(value).c_str());
  }
  if (flags.out.empty() && flags.vectors.empty()) return absl::OkStatus();

  RunManifest manifest;
  manifest.command = "distance-report";
  manifest.args = argv;
  RETURN_IF_ERROR(manifest.AddInput(flags.checkpoint));
  RETURN_IF_ERROR(manifest.AddInput(flags.examples));
  RETURN_IF_ERROR(manifest.AddInput(FeaturePathFor(flags.examples)));
  if (!flags.out.empty()) {
    RETURN_IF_ERROR(WriteDistanceTsv(flags.out, rows));
    RETURN_IF_ERROR(manifest.AddOutput(flags.out));
  }
  if (!flags.vectors.empty()) {
    std::vector<EmbeddingRecord> records;
    for (const ChoiceItem& item : items) {
      ASSIGN_OR_RETURN(image, EncodeImage(ckpt.params, item.image_features));
      ASSIGN_OR_RETURN(text,
                       EncodeText(ckpt.params,
                                  ckpt.vocab.Encode(item.positive.tokens)));
      ASSIGN_OR_RETURN(neg_text,
                       EncodeText(ckpt.params,
                                  ckpt.vocab.Encode(item.negative.tokens)));
      std::vector<double> shifted(image.dim());
      for (std::size_t d = 0; d < shifted.size(); ++d) {
        shifted[d] = image[d] + (neg_text[d] - text[d]);
      }
      records.push_back({item.id + "/image", image});
      records.push_back({item.id + "/text", text});
      records.push_back({item.id + "/negative_text", neg_text});
      records.push_back({item.id + "/negative_image",
                         EmbeddingVector(std::move(shifted))});
    }
    RETURN_IF_ERROR(WriteEmbeddingFile(
        flags.vectors, ckpt.params.config.embed_dim, records));
    RETURN_IF_ERROR(manifest.AddOutput(flags.vectors));
  }
  const std::string base = flags.out.empty() ? flags.vectors : flags.out;
  return manifest.Write(base + ".manifest.json");
}

int Main(int argc, char** argv) {
  const std::vector<std::string> args = Argv(argc, argv);
  CLI::App app{"ahnpl: hard-negative contrastive training for dual encoders"};
  app.require_subcommand(1);
  app.set_version_flag("--version", AHNPL_VERSION);

  GenDataFlags gen_data;
  CLI::App* gd = app.add_subcommand(
      "gen-data", "Write synthetic train corpus, features, benchmark, lexicon");
  gen_data.config.Register(gd);
  gd->add_option("--out-dir", gen_data.out_dir, "Output directory")
      ->required();

  GenNegativesFlags gen_neg;
  CLI::App* gn = app.add_subcommand(
      "gen-negatives", "Generate textual hard negatives for a corpus");
  gn->add_option("--corpus", gen_neg.corpus, "Corpus TSV: id<TAB>tokens")
      ->required()
      ->check(CLI::ExistingFile);
  gn->add_option("--lexicon", gen_neg.lexicon, "Lexicon TSV: word<TAB>TAG")
      ->required()
      ->check(CLI::ExistingFile);
  gn->add_option("--k", gen_neg.k, "Negatives per kind")->capture_default_str();
  gn->add_option("--seed", gen_neg.seed, "Seed")->capture_default_str();
  gn->add_option("--out", gen_neg.out, "Negative corpus TSV")->required();

  TrainFlags train;
  CLI::App* tr = app.add_subcommand("train", "Train the dual encoder");
  train.config.Register(tr);
  tr->add_option("--corpus", train.corpus, "Train corpus TSV (+ .emb)")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--negatives", train.negatives, "Negative corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--lexicon", train.lexicon, "Lexicon TSV")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--benchmark", train.benchmark,
                 "Benchmark TSV evaluated after every epoch")
      ->check(CLI::ExistingFile);
  tr->add_option("--out-dir", train.out_dir, "Output directory")->required();
  tr->add_flag("--no-negatives", train.no_negatives,
               "Drop hard negatives from the contrastive loss");
  tr->add_flag("--no-mhnl", train.no_mhnl,
               "Disable the multimodal hard negative loss");
  tr->add_flag("--no-dmcl", train.no_dmcl,
               "Disable the dynamic margin loss");

  EvalFlags eval;
  CLI::App* ev = app.add_subcommand("eval", "Binary-choice accuracy");
  ev->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")
      ->required();
  ev->add_option("--benchmark", eval.benchmark, "Benchmark TSV (+ .emb)")
      ->required();
  ev->add_option("--lexicon", eval.lexicon, "Lexicon TSV (optional)");
  ev->add_option("--out", eval.out, "Per-category accuracy CSV");
  ev->add_option("--items", eval.items, "Per-item margins TSV");

  GradCheckFlags grad;
  CLI::App* gc = app.add_subcommand(
      "gradcheck", "Compare analytic and finite-difference gradients");
  gc->add_option("--variant", grad.variant, "bag or position")
      ->capture_default_str();
  gc->add_option("--seed", grad.seed, "Fixture seed")->capture_default_str();
  gc->add_option("--epsilon", grad.epsilon, "Finite-difference step")
      ->capture_default_str();
  gc->add_option("--tolerance", grad.tolerance, "Max relative error")
      ->capture_default_str();
  gc->add_option("--corrupt", grad.corrupt,
                 "Add this to one analytic coordinate (canary)")
      ->capture_default_str();
  gc->add_option("--n", grad.n, "Batch size")->capture_default_str();
  gc->add_option("--k", grad.k, "Negatives per sample")->capture_default_str();
  gc->add_option("--dim", grad.dim, "Embedding dimension")
      ->capture_default_str();
  gc->add_option("--out", grad.out, "JSON report");

  DistanceFlags dist;
  CLI::App* dr = app.add_subcommand(
      "distance-report", "Cosine distances among key embedding pairs");
  dr->add_option("--checkpoint", dist.checkpoint, "Checkpoint file")
      ->required();
  dr->add_option("--examples", dist.examples, "Benchmark-format TSV (+ .emb)")
      ->required();
  dr->add_option("--out", dist.out, "Per-item distance TSV");
  dr->add_option("--vectors", dist.vectors, "Embedding file of all vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  absl::Status status;
  if (*gd) status = GenData(gen_data, args);
  if (*gn) status = GenNegatives(gen_neg, args);
  if (*tr) status = RunTrain(train, args);
  if (*ev) status = RunEval(eval, args);
  if (*gc) status = RunGradCheck(grad, args);
  if (*dr) status = RunDistanceReport(dist, args);
  return ExitCode(status);
}

}  // namespace
}  // namespace ahnpl

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  return ahnpl::Main(argc, argv);
}
