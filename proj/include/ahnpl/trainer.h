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

// Batch assembly, AdamW, the training step and the training loop.
//
// One step runs, in order:
//   1. derive thresholds M^t from the step t-1 similarity cache;
//   2. encode the batch and evaluate L_total and its gradients;
//   3. apply AdamW to the encoder weights and to a (a gets no decay);
//   4. clamp a to the lower bound;
//   5. cache this step's similarities for step t+1.

#ifndef AHNPL_TRAINER_H_
#define AHNPL_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/config.h"
#include "ahnpl/encoders.h"
#include "ahnpl/eval_harness.h"
#include "ahnpl/losses.h"
#include "ahnpl/negative_textgen.h"
#include "ahnpl/random.h"
#include "ahnpl/synthetic_data.h"
#include "json.hpp"

namespace ahnpl {

// A caption/image pair before vocabulary lookup.
struct RawSample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<double> features;
};

// A pair ready for batching: token ids, features and exactly K negative
// captions, slot n at index n.
struct TrainingSample {
  std::string id;
  std::vector<int> token_ids;
  std::vector<double> features;
  std::vector<std::vector<int>> negatives;
};

struct PreparedSamples {
  std::vector<TrainingSample> samples;
  int dropped = 0;  // Samples without any negative.
  int padded = 0;   // Samples whose set was padded up to K.
};

// Joins samples with their negative sets by id. Samples with no negatives
// are dropped (and counted); sets with fewer than K negatives are padded by
// resampling their own negatives; sets with more keep the first K.
absl::StatusOr<PreparedSamples> PrepareSamples(
    std::span<const RawSample> raw, std::span<const TextualNegativeSet> sets,
    const Vocabulary& vocab, int negatives_per_sample, Rng& rng);

// Sorted union of every token in `captions`, after the reserved id 0.
Vocabulary BuildVocabulary(
    std::span<const std::vector<std::string>> captions);

// Encodes originals and negatives and builds the slot-aligned visual
// negatives.
absl::StatusOr<BatchTensors> AssembleBatch(
    const EncoderParams& params, std::span<const TrainingSample> samples,
    double temperature);

// Chains embedding gradients of `batch` into encoder parameter gradients.
void BackpropBatch(const EncoderParams& params,
                   std::span<const TrainingSample> samples,
                   const BatchGradients& grads, bool detach_visual_text,
                   EncoderGradients& out);

struct ModelLoss {
  double value = 0.0;
  EncoderGradients grads;
  double grad_a = 0.0;
  std::vector<bool> hinge_active;
  std::vector<double> hinge_margins;
  BatchTensors batch;
};

// One loss term as a function of encoder parameters and a.
absl::StatusOr<ModelLoss> EvaluateModelLoss(
    const EncoderParams& params, const MarginState& state,
    std::span<const TrainingSample> samples, LossTerm term,
    const LossSwitches& switches, double temperature,
    bool detach_visual_text);

// Adam moments for every parameter value and for a.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  double m_a = 0.0;
  double v_a = 0.0;
  long t = 0;

  static AdamState For(const EncoderParams& params);
};

// One AdamW update with bias-corrected moments at step t >= 1:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
void AdamWUpdate(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long t, double lr,
                 double weight_decay, const OptimizerConfig& opt);

struct TrainState {
  EncoderParams params;
  MarginState margin;
  AdamState adam;
};

// Fresh parameters, a and moments from the "init" stream of `seed`.
absl::StatusOr<TrainState> InitTrainState(const TrainConfig& config,
                                          const EncoderConfig& encoder,
                                          std::uint64_t seed);

EncoderConfig EncoderConfigFor(const TrainConfig& config, int vocab_size,
                               int feature_dim);

struct StepRecord {
  long step = 0;
  double l_cont = 0.0;
  double l_neg_visual = 0.0;
  double l_neg_textual = 0.0;
  double l_mar_pos = 0.0;
  double l_mar_neg = 0.0;
  double l_total = 0.0;
  double a = 0.0;                  // After the clamp.
  std::vector<double> thresholds;  // M^t used by this step.

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

// Fails with kInternal on a non-finite loss; the message carries the
// breakdown.
absl::StatusOr<StepRecord> TrainStep(const TrainConfig& config,
                                     std::span<const TrainingSample> batch,
                                     TrainState& state);

struct EpochEval {
  int epoch = 0;
  double accuracy = 0.0;

  friend bool operator==(const EpochEval&, const EpochEval&) = default;
};

struct TrainReport {
  std::vector<StepRecord> history;
  std::vector<EpochEval> evals;
  std::string checkpoint_id;
  double wall_clock_seconds = 0.0;

  // Wall-clock is left out unless requested so reruns serialize
  // identically.
  nlohmann::ordered_json ToJson(bool include_wall_clock = false) const;
  static absl::StatusOr<TrainReport> FromJson(const nlohmann::json& j);
};

struct TrainResult {
  TrainReport report;
  Checkpoint checkpoint;
};

// Runs config.epochs passes over `samples` in seeded shuffled order and
// evaluates `benchmark` after every epoch (skipped when empty).
absl::StatusOr<TrainResult> Train(const TrainConfig& config,
                                  std::span<const TrainingSample> samples,
                                  const Vocabulary& vocab, int feature_dim,
                                  std::span<const ChoiceItem> benchmark);

// Stable id of a parameter set: "ckpt-" plus a 64-bit hash of its bits.
std::string CheckpointId(const EncoderParams& params, double margin_a);

// step,l_cont,l_neg_visual,l_neg_textual,l_mar_pos,l_mar_neg,l_total,a,
// then M_0..M_{K-1}.
std::string MetricsCsv(const TrainReport& report);
absl::Status WriteMetricsCsv(const std::string& path,
                             const TrainReport& report);

// In-memory version of gen-data, gen-negatives and train.
struct Dataset {
  std::vector<TrainPair> pairs;
  std::vector<ChoiceItem> benchmark;
};
absl::StatusOr<Dataset> GenerateDataset(const TrainConfig& config);

absl::StatusOr<std::vector<TextualNegativeSet>> GenerateNegatives(
    std::span<const CorpusLine> corpus, const PosLexicon& lexicon,
    int k_per_kind, std::uint64_t seed, int* skipped);

struct ExperimentResult {
  TrainResult train;
  Vocabulary vocab;
  EvalReport eval;
  int dropped = 0;
};
absl::StatusOr<ExperimentResult> RunExperiment(const TrainConfig& config);

}  // namespace ahnpl

#endif  // AHNPL_TRAINER_H_
