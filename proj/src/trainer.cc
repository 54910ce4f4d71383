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

#include "ahnpl/trainer.h"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ahnpl/embedding.h"
#include "ahnpl/visual_perturbation.h"
#include "glog/logging.h"

namespace ahnpl {
namespace {

std::uint64_t MixDouble(std::uint64_t h, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string BreakdownText(const LossBreakdown& b) {
  return absl::StrCat("l_cont=", FormatReal(b.l_cont),
                      " l_neg_visual=", FormatReal(b.l_neg_visual),
                      " l_neg_textual=", FormatReal(b.l_neg_textual),
                      " l_mar_pos=", FormatReal(b.l_mar_pos),
                      " l_mar_neg=", FormatReal(b.l_mar_neg),
                      " l_total=", FormatReal(b.l_total));
}

}  // namespace

absl::StatusOr<PreparedSamples> PrepareSamples(
    std::span<const RawSample> raw, std::span<const TextualNegativeSet> sets,
    const Vocabulary& vocab, int negatives_per_sample, Rng& rng) {
  if (negatives_per_sample < 1) {
    return absl::InvalidArgumentError("negatives_per_sample must be >= 1");
  }
  std::map<std::string, const TextualNegativeSet*> by_id;
  for (const TextualNegativeSet& s : sets) by_id[s.source_id] = &s;

  PreparedSamples out;
  const std::size_t k = static_cast<std::size_t>(negatives_per_sample);
  for (const RawSample& r : raw) {
    auto it = by_id.find(r.id);
    if (it == by_id.end() || it->second->empty()) {
      ++out.dropped;
      continue;
    }
    const TextualNegativeSet& set = *it->second;
    TrainingSample s;
    s.id = r.id;
    s.token_ids = vocab.Encode(r.tokens);
    s.features = r.features;
    for (std::size_t n = 0; n < std::min(k, set.size()); ++n) {
      s.negatives.push_back(vocab.Encode(set.negatives[n].caption.tokens));
    }
    if (s.negatives.size() < k) ++out.padded;
    const std::size_t own = s.negatives.size();
    while (s.negatives.size() < k) {
      s.negatives.push_back(s.negatives[UniformIndex(rng, own)]);
    }
    out.samples.push_back(std::move(s));
  }
  if (out.dropped > 0) {
    LOG(WARNING) << "dropped " << out.dropped
                 << " samples without textual negatives";
  }
  return out;
}

Vocabulary BuildVocabulary(
    std::span<const std::vector<std::string>> captions) {
  std::set<std::string> words;
  for (const auto& c : captions) words.insert(c.begin(), c.end());
  Vocabulary vocab;
  for (const std::string& w : words) vocab.Add(w);
  return vocab;
}

absl::StatusOr<BatchTensors> AssembleBatch(
    const EncoderParams& params, std::span<const TrainingSample> samples,
    double temperature) {
  if (samples.empty()) return absl::InvalidArgumentError("empty batch");
  BatchTensors batch;
  batch.temperature = temperature;
  for (const TrainingSample& s : samples) {
    absl::StatusOr<EmbeddingVector> text = EncodeText(params, s.token_ids);
    if (!text.ok()) return text.status();
    absl::StatusOr<EmbeddingVector> image = EncodeImage(params, s.features);
    if (!image.ok()) return image.status();
    std::vector<EmbeddingVector> negatives;
    for (const std::vector<int>& ids : s.negatives) {
      absl::StatusOr<EmbeddingVector> neg = EncodeText(params, ids);
      if (!neg.ok()) return neg.status();
      negatives.push_back(*std::move(neg));
    }
    absl::StatusOr<VisualNegativeSet> visual =
        BuildVisualNegatives(*image, *text, negatives);
    if (!visual.ok()) return visual.status();
    std::vector<EmbeddingVector> visual_embeddings;
    for (VisualNegative& v : visual->negatives) {
      visual_embeddings.push_back(std::move(v.embedding));
    }
    batch.texts.push_back(*std::move(text));
    batch.images.push_back(*std::move(image));
    batch.text_negatives.push_back(std::move(negatives));
    batch.visual_negatives.push_back(std::move(visual_embeddings));
  }
  return batch;
}

void BackpropBatch(const EncoderParams& params,
                   std::span<const TrainingSample> samples,
                   const BatchGradients& grads, bool detach_visual_text,
                   EncoderGradients& out) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<double> g_text = grads.texts[i];
    std::vector<double> g_image = grads.images[i];
    std::vector<std::vector<double>> g_neg = grads.text_negatives[i];
    for (std::size_t n = 0; n < grads.visual_negatives[i].size(); ++n) {
      BackpropVisualNegative(grads.visual_negatives[i][n], g_image, g_text,
                             g_neg[n], detach_visual_text);
    }
    BackwardText(params, samples[i].token_ids, g_text, out);
    BackwardImage(params, samples[i].features, g_image, out);
    for (std::size_t n = 0; n < g_neg.size(); ++n) {
      BackwardText(params, samples[i].negatives[n], g_neg[n], out);
    }
  }
}

absl::StatusOr<ModelLoss> EvaluateModelLoss(
    const EncoderParams& params, const MarginState& state,
    std::span<const TrainingSample> samples, LossTerm term,
    const LossSwitches& switches, double temperature,
    bool detach_visual_text) {
  absl::StatusOr<BatchTensors> batch =
      AssembleBatch(params, samples, temperature);
  if (!batch.ok()) return batch.status();
  absl::StatusOr<LossValue> loss =
      EvaluateLossTerm(term, *batch, state, switches);
  if (!loss.ok()) return loss.status();
  ModelLoss out;
  out.value = loss->value;
  out.grad_a = loss->grads.margin_a;
  out.hinge_active = std::move(loss->hinge_active);
  out.hinge_margins = std::move(loss->hinge_margins);
  out.grads = EncoderParams::Zeros(params.config);
  BackpropBatch(params, samples, loss->grads, detach_visual_text, out.grads);
  out.batch = *std::move(batch);
  return out;
}

AdamState AdamState::For(const EncoderParams& params) {
  AdamState s;
  for (const ParamBlock* b : params.Blocks()) {
    s.m.emplace_back(b->values.size(), 0.0);
    s.v.emplace_back(b->values.size(), 0.0);
  }
  return s;
}

void AdamWUpdate(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long t, double lr,
                 double weight_decay, const OptimizerConfig& opt) {
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * grads[i];
    v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * grads[i] * grads[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + opt.epsilon) +
                       weight_decay * params[i]);
  }
}

EncoderConfig EncoderConfigFor(const TrainConfig& config, int vocab_size,
                               int feature_dim) {
  EncoderConfig e;
  e.variant = config.variant;
  e.vocab_size = vocab_size;
  e.hidden_dim = config.hidden_dim;
  e.embed_dim = config.embed_dim;
  e.feature_dim = feature_dim;
  e.max_length = config.max_length;
  return e;
}

absl::StatusOr<TrainState> InitTrainState(const TrainConfig& config,
                                          const EncoderConfig& encoder,
                                          std::uint64_t seed) {
  Rng rng = MakeStream(seed, "init");
  absl::StatusOr<EncoderParams> params = InitParams(encoder, rng);
  if (!params.ok()) return params.status();
  TrainState state;
  state.params = *std::move(params);
  state.margin = MarginState::Initial(StandardNormal(rng),
                                      config.negatives_per_sample);
  state.adam = AdamState::For(state.params);
  return state;
}

absl::StatusOr<StepRecord> TrainStep(const TrainConfig& config,
                                     std::span<const TrainingSample> batch,
                                     TrainState& state) {
  // 1. Thresholds from the previous step only.
  if (state.margin.previous.has_value()) {
    const SimilarityCache prev = *state.margin.previous;
    absl::StatusOr<MarginState> next =
        UpdateAdaptiveThresholds(prev, std::move(state.margin));
    if (!next.ok()) return next.status();
    state.margin = *std::move(next);
  } else {
    ++state.margin.step;
  }

  // 2. Forward and backward.
  absl::StatusOr<BatchTensors> tensors =
      AssembleBatch(state.params, batch, config.temperature);
  if (!tensors.ok()) return tensors.status();
  absl::StatusOr<LossBreakdown> loss =
      TotalLoss(*tensors, state.margin, config.switches);
  if (!loss.ok()) return loss.status();
  if (!loss->AllFinite()) {
    return absl::InternalError(absl::StrCat("non-finite loss at step ",
                                            state.margin.step, ": ",
                                            BreakdownText(*loss)));
  }
  EncoderGradients grads = EncoderParams::Zeros(state.params.config);
  BackpropBatch(state.params, batch, loss->grads, config.detach_visual_text,
                grads);

  // 3. AdamW.
  AdamState& adam = state.adam;
  ++adam.t;
  std::vector<ParamBlock*> blocks = state.params.Blocks();
  std::vector<const ParamBlock*> grad_blocks =
      std::as_const(grads).Blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    AdamWUpdate(blocks[b]->values, grad_blocks[b]->values, adam.m[b],
                adam.v[b], adam.t, config.learning_rate, config.weight_decay,
                config.optimizer);
  }
  double a = state.margin.a;
  AdamWUpdate(std::span<double>(&a, 1),
              std::span<const double>(&loss->grads.margin_a, 1),
              std::span<double>(&adam.m_a, 1), std::span<double>(&adam.v_a, 1),
              adam.t, config.learning_rate, /*weight_decay=*/0.0,
              config.optimizer);
  state.margin.a = a;

  // 4. Clamp.
  state.margin.ClampA();
  if (!state.params.AllFinite() || !std::isfinite(state.margin.a)) {
    return absl::InternalError(absl::StrCat(
        "non-finite parameters after step ", state.margin.step, ": ",
        BreakdownText(*loss)));
  }

  // 5. Cache for the next step.
  state.margin.previous = CollectSimilarities(*tensors);

  StepRecord r;
  r.step = state.margin.step;
  r.l_cont = loss->l_cont;
  r.l_neg_visual = loss->l_neg_visual;
  r.l_neg_textual = loss->l_neg_textual;
  r.l_mar_pos = loss->l_mar_pos;
  r.l_mar_neg = loss->l_mar_neg;
  r.l_total = loss->l_total;
  r.a = state.margin.a;
  r.thresholds = state.margin.thresholds;
  return r;
}

nlohmann::ordered_json TrainReport::ToJson(bool include_wall_clock) const {
  nlohmann::ordered_json j;
  j["checkpoint_id"] = checkpoint_id;
  if (include_wall_clock) j["wall_clock_seconds"] = wall_clock_seconds;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const StepRecord& r : history) {
    steps.push_back({{"step", r.step},
                     {"l_cont", r.l_cont},
                     {"l_neg_visual", r.l_neg_visual},
                     {"l_neg_textual", r.l_neg_textual},
                     {"l_mar_pos", r.l_mar_pos},
                     {"l_mar_neg", r.l_mar_neg},
                     {"l_total", r.l_total},
                     {"a", r.a},
                     {"thresholds", r.thresholds}});
  }
  j["history"] = std::move(steps);
  nlohmann::ordered_json evals_json = nlohmann::ordered_json::array();
  for (const EpochEval& e : evals) {
    evals_json.push_back({{"epoch", e.epoch}, {"accuracy", e.accuracy}});
  }
  j["evals"] = std::move(evals_json);
  return j;
}

absl::StatusOr<TrainReport> TrainReport::FromJson(const nlohmann::json& j) {
  TrainReport r;
  try {
    r.checkpoint_id = j.at("checkpoint_id").get<std::string>();
    if (j.contains("wall_clock_seconds")) {
      r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    }
    for (const auto& s : j.at("history")) {
      StepRecord rec;
      rec.step = s.at("step").get<long>();
      rec.l_cont = s.at("l_cont").get<double>();
      rec.l_neg_visual = s.at("l_neg_visual").get<double>();
      rec.l_neg_textual = s.at("l_neg_textual").get<double>();
      rec.l_mar_pos = s.at("l_mar_pos").get<double>();
      rec.l_mar_neg = s.at("l_mar_neg").get<double>();
      rec.l_total = s.at("l_total").get<double>();
      rec.a = s.at("a").get<double>();
      rec.thresholds = s.at("thresholds").get<std::vector<double>>();
      r.history.push_back(std::move(rec));
    }
    for (const auto& e : j.at("evals")) {
      r.evals.push_back(
          {e.at("epoch").get<int>(), e.at("accuracy").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("report: ", e.what()));
  }
  return r;
}

std::string CheckpointId(const EncoderParams& params, double margin_a) {
  std::uint64_t h = StableHash(VariantName(params.config.variant));
  for (const ParamBlock* b : params.Blocks()) {
    h ^= StableHash(b->name);
    h *= 0x100000001b3ULL;
    for (double v : b->values) h = MixDouble(h, v);
  }
  h = MixDouble(h, margin_a);
  return absl::StrFormat("ckpt-%016x", h);
}

absl::StatusOr<TrainResult> Train(const TrainConfig& config,
                                  std::span<const TrainingSample> samples,
                                  const Vocabulary& vocab, int feature_dim,
                                  std::span<const ChoiceItem> benchmark) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (samples.empty()) {
    return absl::InvalidArgumentError("no training samples");
  }
  for (const TrainingSample& s : samples) {
    if (s.negatives.size() !=
        static_cast<std::size_t>(config.negatives_per_sample)) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample ", s.id, " has ", s.negatives.size(),
                       " negatives, expected ", config.negatives_per_sample));
    }
  }
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<TrainState> state = InitTrainState(
      config, EncoderConfigFor(config, vocab.size(), feature_dim),
      config.seed);
  if (!state.ok()) return state.status();

  Rng shuffle = MakeStream(config.seed, "shuffle");
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  std::vector<TrainingSample> batch;
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Shuffle(order, shuffle);
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      batch.clear();
      for (std::size_t i = begin; i < std::min(order.size(), begin + bs);
           ++i) {
        batch.push_back(samples[order[i]]);
      }
      absl::StatusOr<StepRecord> rec = TrainStep(config, batch, *state);
      if (!rec.ok()) return rec.status();
      result.report.history.push_back(*std::move(rec));
    }
    if (!benchmark.empty()) {
      absl::StatusOr<EvalReport> eval =
          EvaluateChoice(state->params, vocab, benchmark);
      if (!eval.ok()) return eval.status();
      result.report.evals.push_back({epoch, eval->overall_accuracy});
    }
  }
  result.checkpoint.params = std::move(state->params);
  result.checkpoint.vocab = vocab;
  result.checkpoint.margin_a = state->margin.a;
  result.report.checkpoint_id =
      CheckpointId(result.checkpoint.params, result.checkpoint.margin_a);
  result.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

std::string MetricsCsv(const TrainReport& report) {
  std::ostringstream out;
  out << "step,l_cont,l_neg_visual,l_neg_textual,l_mar_pos,l_mar_neg,"
         "l_total,a";
  const std::size_t k =
      report.history.empty() ? 0 : report.history.front().thresholds.size();
  for (std::size_t n = 0; n < k; ++n) out << ",M_" << n;
  out << '\n';
  for (const StepRecord& r : report.history) {
    out << r.step << ',' << FormatReal(r.l_cont) << ','
        << FormatReal(r.l_neg_visual) << ',' << FormatReal(r.l_neg_textual)
        << ',' << FormatReal(r.l_mar_pos) << ',' << FormatReal(r.l_mar_neg)
        << ',' << FormatReal(r.l_total) << ',' << FormatReal(r.a);
    for (double m : r.thresholds) out << ',' << FormatReal(m);
    out << '\n';
  }
  return out.str();
}

absl::Status WriteMetricsCsv(const std::string& path,
                             const TrainReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << MetricsCsv(report);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Dataset> GenerateDataset(const TrainConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  Rng rng = MakeStream(config.seed, "data");
  Dataset d;
  d.pairs = GenerateTrainPairs(config.data.train_pairs, config.data.sizes,
                               config.data.noise_sigma, rng);
  absl::StatusOr<std::vector<ChoiceItem>> bench =
      BuildBenchmark(config.data.benchmark_items, AllCategories(),
                     config.data.sizes, config.data.noise_sigma, rng);
  if (!bench.ok()) return bench.status();
  d.benchmark = *std::move(bench);
  return d;
}

absl::StatusOr<std::vector<TextualNegativeSet>> GenerateNegatives(
    std::span<const CorpusLine> corpus, const PosLexicon& lexicon,
    int k_per_kind, std::uint64_t seed, int* skipped) {
  Rng rng = MakeStream(seed, "negatives");
  std::vector<TextualNegativeSet> sets;
  int empty = 0;
  for (const CorpusLine& line : corpus) {
    absl::StatusOr<Caption> caption = TagTokens(line.tokens, lexicon);
    if (!caption.ok()) return caption.status();
    caption->id = line.id;
    absl::StatusOr<TextualNegativeSet> set =
        GenerateNegativeSet(*caption, k_per_kind, lexicon, rng);
    if (!set.ok()) return set.status();
    if (set->empty()) ++empty;
    set->source_id = line.id;
    sets.push_back(*std::move(set));
  }
  if (skipped != nullptr) *skipped = empty;
  return sets;
}

absl::StatusOr<ExperimentResult> RunExperiment(const TrainConfig& config) {
  absl::StatusOr<Dataset> data = GenerateDataset(config);
  if (!data.ok()) return data.status();
  const PosLexicon lexicon = SceneLexicon(config.data.sizes);

  std::vector<CorpusLine> corpus;
  std::vector<RawSample> raw;
  for (const TrainPair& p : data->pairs) {
    corpus.push_back({p.id, p.caption.tokens});
    raw.push_back({p.id, p.caption.tokens, p.image_features});
  }
  absl::StatusOr<std::vector<TextualNegativeSet>> sets = GenerateNegatives(
      corpus, lexicon, config.k_per_kind, config.seed, nullptr);
  if (!sets.ok()) return sets.status();

  std::vector<std::vector<std::string>> captions;
  for (const CorpusLine& c : corpus) captions.push_back(c.tokens);
  for (const TextualNegativeSet& s : *sets) {
    for (const TextualNegative& n : s.negatives) {
      captions.push_back(n.caption.tokens);
    }
  }
  for (const ChoiceItem& item : data->benchmark) {
    captions.push_back(item.positive.tokens);
    captions.push_back(item.negative.tokens);
  }
  ExperimentResult result;
  result.vocab = BuildVocabulary(captions);

  Rng pad = MakeStream(config.seed, "negatives");
  absl::StatusOr<PreparedSamples> prepared = PrepareSamples(
      raw, *sets, result.vocab, config.negatives_per_sample, pad);
  if (!prepared.ok()) return prepared.status();
  result.dropped = prepared->dropped;

  absl::StatusOr<TrainResult> trained =
      Train(config, prepared->samples, result.vocab,
            config.data.sizes.FeatureDim(), data->benchmark);
  if (!trained.ok()) return trained.status();
  result.train = *std::move(trained);
  absl::StatusOr<EvalReport> eval = EvaluateChoice(
      result.train.checkpoint.params, result.vocab, data->benchmark);
  if (!eval.ok()) return eval.status();
  result.eval = *std::move(eval);
  return result;
}

}  // namespace ahnpl
