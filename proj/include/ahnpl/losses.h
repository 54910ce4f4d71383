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

// Loss terms of the hard-negative objective with analytic gradients.
//
//   L_cont       symmetric InfoNCE over the N x N text/image cosine matrix,
//                summed (not averaged) over the batch.
//   L_neg_vis    sum_i logsumexp_n S(I_i, I_{i,n})
//   L_neg_txt    sum_i logsumexp_n S(T_i, T_{i,n})
//   L_mar_pos    sum_i max(0, a - S(I_i, T_i))
//   L_mar_neg    sum_i sum_n max(0, S(I_i, T_{i,n}) - S(I_i, T_i) + M_n)
//   L_total      L_cont + (L_neg_vis + L_neg_txt) + (L_mar_pos + L_mar_neg)
//
// S is cosine similarity. Only L_cont divides by the temperature. Every
// gradient is taken with respect to the embeddings held in BatchTensors and
// the margin parameter a; the trainer chains them into encoder parameters.
// Hinges use subgradient 0 at exactly zero margin.

#ifndef AHNPL_LOSSES_H_
#define AHNPL_LOSSES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/embedding.h"

namespace ahnpl {

inline constexpr double kMarginLowerBound = 0.2;
inline constexpr double kDefaultTemperature = 0.07;

// One training batch in embedding space. Row i of every tensor belongs to
// sample i; text_negatives[i][n] and visual_negatives[i][n] share slot n.
struct BatchTensors {
  std::vector<EmbeddingVector> texts;
  std::vector<EmbeddingVector> images;
  std::vector<std::vector<EmbeddingVector>> text_negatives;
  std::vector<std::vector<EmbeddingVector>> visual_negatives;
  double temperature = kDefaultTemperature;

  std::size_t size() const { return texts.size(); }
  std::size_t dim() const { return texts.empty() ? 0 : texts[0].dim(); }
};

// Checks shapes, finiteness, nonzero norms and temperature > 0.
absl::Status ValidateBatch(const BatchTensors& batch);

// Same layout as BatchTensors plus the margin parameter.
struct BatchGradients {
  std::vector<std::vector<double>> texts;
  std::vector<std::vector<double>> images;
  std::vector<std::vector<std::vector<double>>> text_negatives;
  std::vector<std::vector<std::vector<double>>> visual_negatives;
  double margin_a = 0.0;

  static BatchGradients ZerosLike(const BatchTensors& batch);
  void Add(const BatchGradients& other);
};

struct LossValue {
  double value = 0.0;
  BatchGradients grads;
  // Activity of each hinge in evaluation order; empty for smooth losses.
  std::vector<bool> hinge_active;
  // Hinge arguments in the same order.
  std::vector<double> hinge_margins;
};

// Previous-step similarities that feed the adaptive thresholds.
// positive[i] = S(I_i, T_i); negative[i][n] = S(I_i, T_{i,n}).
struct SimilarityCache {
  std::vector<double> positive;
  std::vector<std::vector<double>> negative;

  std::size_t num_slots() const;
};

struct MarginState {
  double a = kMarginLowerBound;
  std::vector<double> thresholds;  // M_n, one per negative slot.
  std::optional<SimilarityCache> previous;
  long step = 0;

  // a ~ N(0, 1) clamped to the lower bound; thresholds start at zero.
  static MarginState Initial(double normal_draw, std::size_t num_slots);
  void ClampA();
};

// Which terms enter the total. use_negatives appends each sample's textual
// negatives to the image-to-text softmax of L_cont.
struct LossSwitches {
  bool use_negatives = true;
  bool use_mhnl = true;
  bool use_dmcl = true;
};

struct LossBreakdown {
  double l_cont = 0.0;
  double l_neg_visual = 0.0;
  double l_neg_textual = 0.0;
  double l_neg = 0.0;
  double l_mar_pos = 0.0;
  double l_mar_neg = 0.0;
  double l_mar = 0.0;
  double l_total = 0.0;
  BatchGradients grads;  // Gradient of l_total.
  std::vector<bool> hinge_active;
  std::vector<double> hinge_margins;

  bool AllFinite() const;
};

// Numerically stable log(sum(exp(x))).
double LogSumExp(std::span<const double> x);
// The literal form -log(1 / sum(exp(x))); agrees with LogSumExp for
// moderate inputs.
double NegLogInverseSumExp(std::span<const double> x);

// Symmetric InfoNCE evaluated on a similarity matrix; rows are texts.
double ContrastiveLossFromSimilarities(const SimilarityMatrix& sims,
                                       double temperature);

absl::StatusOr<LossValue> ContrastiveLoss(const BatchTensors& batch,
                                          bool with_text_negatives = false);
absl::StatusOr<LossValue> VisualNegativeLoss(const BatchTensors& batch);
absl::StatusOr<LossValue> TextualNegativeLoss(const BatchTensors& batch);
absl::StatusOr<LossValue> NegativeLoss(const BatchTensors& batch);
absl::StatusOr<LossValue> PositiveMarginLoss(const BatchTensors& batch,
                                             const MarginState& state);
// Fails with FailedPrecondition when a slot has no threshold.
absl::StatusOr<LossValue> NegativeMarginLoss(const BatchTensors& batch,
                                             const MarginState& state);
absl::StatusOr<LossValue> MarginLoss(const BatchTensors& batch,
                                     const MarginState& state);
absl::StatusOr<LossBreakdown> TotalLoss(const BatchTensors& batch,
                                        const MarginState& state,
                                        const LossSwitches& switches);

enum class LossTerm {
  kContrastive,
  kVisualNegative,
  kTextualNegative,
  kPositiveMargin,
  kNegativeMargin,
  kTotal,
};

const std::vector<LossTerm>& AllLossTerms();
std::string LossTermName(LossTerm term);

// Evaluates one named term. The contrastive term honors
// switches.use_negatives; kTotal honors every switch.
absl::StatusOr<LossValue> EvaluateLossTerm(LossTerm term,
                                           const BatchTensors& batch,
                                           const MarginState& state,
                                           const LossSwitches& switches);

// Per-sample S(I, T) and S(I, T_n) of the batch, for the next step's
// thresholds.
SimilarityCache CollectSimilarities(const BatchTensors& batch);

// M_n = mean_i (prev.positive[i] - prev.negative[i][n]) for every slot
// present in prev. Slots of the old state that prev does not cover are
// reset to zero. Increments step.
absl::StatusOr<MarginState> UpdateAdaptiveThresholds(
    const SimilarityCache& prev, MarginState state);

}  // namespace ahnpl

#endif  // AHNPL_LOSSES_H_
