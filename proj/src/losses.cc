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

#include "ahnpl/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "glog/logging.h"

namespace ahnpl {
namespace {

std::vector<std::vector<double>> ZerosFor(
    const std::vector<EmbeddingVector>& vs) {
  std::vector<std::vector<double>> out;
  out.reserve(vs.size());
  for (const EmbeddingVector& v : vs) out.emplace_back(v.dim(), 0.0);
  return out;
}

void AddInto(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

absl::Status CheckVector(const EmbeddingVector& v, std::size_t dim,
                         absl::string_view what) {
  if (v.dim() != dim) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, " has dim ", v.dim(), ", expected ", dim));
  }
  if (!v.AllFinite()) {
    return absl::InvalidArgumentError(absl::StrCat(what, " is not finite"));
  }
  if (L2Norm(v.values()) == 0.0) {
    return absl::InvalidArgumentError(absl::StrCat(what, " has zero norm"));
  }
  return absl::OkStatus();
}

// Row-wise softmax probabilities of `logits` and their log-partition.
double SoftmaxInPlace(std::vector<double>& logits) {
  const double lse = LogSumExp(logits);
  for (double& l : logits) l = std::exp(l - lse);
  return lse;
}

// Shared kernel of the two hard-negative losses: sum over samples of the
// logsumexp of cos(anchor_i, negative_{i,n}).
LossValue NegativeLogSumExpLoss(
    const BatchTensors& batch, const std::vector<EmbeddingVector>& anchors,
    const std::vector<std::vector<EmbeddingVector>>& negatives,
    bool anchors_are_images, bool negatives_are_visual) {
  LossValue out;
  out.grads = BatchGradients::ZerosLike(batch);
  auto& anchor_grads =
      anchors_are_images ? out.grads.images : out.grads.texts;
  auto& negative_grads = negatives_are_visual ? out.grads.visual_negatives
                                              : out.grads.text_negatives;
  std::vector<double> sims;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& set = negatives[i];
    if (set.empty()) continue;
    sims.clear();
    for (const EmbeddingVector& neg : set) {
      sims.push_back(CosineUnchecked(anchors[i].values(), neg.values()));
    }
    out.value += LogSumExp(sims);
    SoftmaxInPlace(sims);
    for (std::size_t n = 0; n < set.size(); ++n) {
      AccumulateCosineGradient(anchors[i].values(), set[n].values(), sims[n],
                               anchor_grads[i], negative_grads[i][n]);
    }
  }
  return out;
}

}  // namespace

absl::Status ValidateBatch(const BatchTensors& batch) {
  const std::size_t n = batch.size();
  if (n == 0) return absl::InvalidArgumentError("empty batch");
  if (batch.images.size() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "batch has ", n, " texts but ", batch.images.size(), " images"));
  }
  if (!(batch.temperature > 0.0) || !std::isfinite(batch.temperature)) {
    return absl::InvalidArgumentError("temperature must be positive");
  }
  if (batch.text_negatives.size() != n ||
      batch.visual_negatives.size() != n) {
    return absl::InvalidArgumentError(
        "negative tensors must have one row per sample");
  }
  const std::size_t dim = batch.dim();
  for (std::size_t i = 0; i < n; ++i) {
    if (absl::Status s = CheckVector(batch.texts[i], dim,
                                     absl::StrCat("text ", i));
        !s.ok()) {
      return s;
    }
    if (absl::Status s = CheckVector(batch.images[i], dim,
                                     absl::StrCat("image ", i));
        !s.ok()) {
      return s;
    }
    if (batch.text_negatives[i].size() != batch.visual_negatives[i].size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "sample ", i, " has unaligned textual and visual negatives"));
    }
    for (std::size_t k = 0; k < batch.text_negatives[i].size(); ++k) {
      if (absl::Status s = CheckVector(batch.text_negatives[i][k], dim,
                                       absl::StrCat("text negative ", i, ",",
                                                    k));
          !s.ok()) {
        return s;
      }
      if (absl::Status s = CheckVector(batch.visual_negatives[i][k], dim,
                                       absl::StrCat("visual negative ", i, ",",
                                                    k));
          !s.ok()) {
        return s;
      }
    }
  }
  return absl::OkStatus();
}

BatchGradients BatchGradients::ZerosLike(const BatchTensors& batch) {
  BatchGradients g;
  g.texts = ZerosFor(batch.texts);
  g.images = ZerosFor(batch.images);
  for (const auto& row : batch.text_negatives) {
    g.text_negatives.push_back(ZerosFor(row));
  }
  for (const auto& row : batch.visual_negatives) {
    g.visual_negatives.push_back(ZerosFor(row));
  }
  return g;
}

void BatchGradients::Add(const BatchGradients& other) {
  for (std::size_t i = 0; i < texts.size(); ++i) AddInto(texts[i], other.texts[i]);
  for (std::size_t i = 0; i < images.size(); ++i) {
    AddInto(images[i], other.images[i]);
  }
  for (std::size_t i = 0; i < text_negatives.size(); ++i) {
    for (std::size_t k = 0; k < text_negatives[i].size(); ++k) {
      AddInto(text_negatives[i][k], other.text_negatives[i][k]);
    }
  }
  for (std::size_t i = 0; i < visual_negatives.size(); ++i) {
    for (std::size_t k = 0; k < visual_negatives[i].size(); ++k) {
      AddInto(visual_negatives[i][k], other.visual_negatives[i][k]);
    }
  }
  margin_a += other.margin_a;
}

std::size_t SimilarityCache::num_slots() const {
  return negative.empty() ? 0 : negative.front().size();
}

MarginState MarginState::Initial(double normal_draw, std::size_t num_slots) {
  MarginState state;
  state.a = normal_draw;
  state.ClampA();
  state.thresholds.assign(num_slots, 0.0);
  return state;
}

void MarginState::ClampA() { a = std::max(a, kMarginLowerBound); }

bool LossBreakdown::AllFinite() const {
  for (double v : {l_cont, l_neg_visual, l_neg_textual, l_neg, l_mar_pos,
                   l_mar_neg, l_mar, l_total}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double LogSumExp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

double NegLogInverseSumExp(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += std::exp(v);
  return -std::log(1.0 / sum);
}

double ContrastiveLossFromSimilarities(const SimilarityMatrix& sims,
                                       double temperature) {
  const std::size_t n = sims.rows();
  double loss = 0.0;
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) logits[j] = sims(i, j) / temperature;
    loss += LogSumExp(logits) - sims(i, i) / temperature;
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) logits[k] = sims(k, j) / temperature;
    loss += LogSumExp(logits) - sims(j, j) / temperature;
  }
  return loss;
}

absl::StatusOr<LossValue> ContrastiveLoss(const BatchTensors& batch,
                                          bool with_text_negatives) {
  if (absl::Status s = ValidateBatch(batch); !s.ok()) return s;
  const std::size_t n = batch.size();
  const double tau = batch.temperature;
  SimilarityMatrix sims(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sims(i, j) =
          CosineUnchecked(batch.texts[i].values(), batch.images[j].values());
    }
  }

  LossValue out;
  out.grads = BatchGradients::ZerosLike(batch);
  SimilarityMatrix d_sims(n, n);
  std::vector<double> logits;

  // Text-to-image: softmax over images for each text row.
  for (std::size_t i = 0; i < n; ++i) {
    logits.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) logits[j] = sims(i, j) / tau;
    out.value += LogSumExp(logits) - sims(i, i) / tau;
    SoftmaxInPlace(logits);
    for (std::size_t j = 0; j < n; ++j) d_sims(i, j) += logits[j] / tau;
    d_sims(i, i) -= 1.0 / tau;
  }

  // Image-to-text: softmax over texts (and optionally the image's own hard
  // negative captions) for each image column.
  std::vector<std::vector<double>> d_negative_sims(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& negatives = batch.text_negatives[j];
    const std::size_t extra = with_text_negatives ? negatives.size() : 0;
    logits.assign(n + extra, 0.0);
    for (std::size_t k = 0; k < n; ++k) logits[k] = sims(k, j) / tau;
    for (std::size_t m = 0; m < extra; ++m) {
      logits[n + m] = CosineUnchecked(negatives[m].values(),
                                      batch.images[j].values()) /
                      tau;
    }
    out.value += LogSumExp(logits) - sims(j, j) / tau;
    SoftmaxInPlace(logits);
    for (std::size_t k = 0; k < n; ++k) d_sims(k, j) += logits[k] / tau;
    d_sims(j, j) -= 1.0 / tau;
    d_negative_sims[j].resize(extra);
    for (std::size_t m = 0; m < extra; ++m) {
      d_negative_sims[j][m] = logits[n + m] / tau;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      AccumulateCosineGradient(batch.texts[i].values(),
                               batch.images[j].values(), d_sims(i, j),
                               out.grads.texts[i], out.grads.images[j]);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < d_negative_sims[j].size(); ++m) {
      AccumulateCosineGradient(batch.text_negatives[j][m].values(),
                               batch.images[j].values(),
                               d_negative_sims[j][m],
                               out.grads.text_negatives[j][m],
                               out.grads.images[j]);
    }
  }
  return out;
}

absl::StatusOr<LossValue> VisualNegativeLoss(const BatchTensors& batch) {
  if (absl::Status s = ValidateBatch(batch); !s.ok()) return s;
  return NegativeLogSumExpLoss(batch, batch.images, batch.visual_negatives,
                               /*anchors_are_images=*/true,
                               /*negatives_are_visual=*/true);
}

absl::StatusOr<LossValue> TextualNegativeLoss(const BatchTensors& batch) {
  if (absl::Status s = ValidateBatch(batch); !s.ok()) return s;
  return NegativeLogSumExpLoss(batch, batch.texts, batch.text_negatives,
                               /*anchors_are_images=*/false,
                               /*negatives_are_visual=*/false);
}

absl::StatusOr<LossValue> NegativeLoss(const BatchTensors& batch) {
  absl::StatusOr<LossValue> visual = VisualNegativeLoss(batch);
  if (!visual.ok()) return visual.status();
  absl::StatusOr<LossValue> textual = TextualNegativeLoss(batch);
  if (!textual.ok()) return textual.status();
  visual->value += textual->value;
  visual->grads.Add(textual->grads);
  return visual;
}

absl::StatusOr<LossValue> PositiveMarginLoss(const BatchTensors& batch,
                                             const MarginState& state) {
  if (absl::Status s = ValidateBatch(batch); !s.ok()) return s;
  if (!std::isfinite(state.a)) {
    return absl::InvalidArgumentError("margin parameter is not finite");
  }
  LossValue out;
  out.grads = BatchGradients::ZerosLike(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double s =
        CosineUnchecked(batch.images[i].values(), batch.texts[i].values());
    const double margin = state.a - s;
    const bool active = margin > 0.0;
    out.hinge_active.push_back(active);
    out.hinge_margins.push_back(margin);
    if (!active) continue;
    out.value += margin;
    out.grads.margin_a += 1.0;
    AccumulateCosineGradient(batch.images[i].values(), batch.texts[i].values(),
                             -1.0, out.grads.images[i], out.grads.texts[i]);
  }
  return out;
}

absl::StatusOr<LossValue> NegativeMarginLoss(const BatchTensors& batch,
                                             const MarginState& state) {
  if (absl::Status s = ValidateBatch(batch); !s.ok()) return s;
  LossValue out;
  out.grads = BatchGradients::ZerosLike(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& negatives = batch.text_negatives[i];
    if (negatives.size() > state.thresholds.size()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "sample ", i, " has ", negatives.size(), " negative slots but only ",
          state.thresholds.size(), " thresholds are defined"));
    }
    const auto image = batch.images[i].values();
    const double positive = CosineUnchecked(image, batch.texts[i].values());
    for (std::size_t n = 0; n < negatives.size(); ++n) {
      const double negative = CosineUnchecked(image, negatives[n].values());
      const double margin = negative - positive + state.thresholds[n];
      const bool active = margin > 0.0;
      out.hinge_active.push_back(active);
      out.hinge_margins.push_back(margin);
      if (!active) continue;
      out.value += margin;
      AccumulateCosineGradient(image, negatives[n].values(), 1.0,
                               out.grads.images[i],
                               out.grads.text_negatives[i][n]);
      AccumulateCosineGradient(image, batch.texts[i].values(), -1.0,
                               out.grads.images[i], out.grads.texts[i]);
    }
  }
  return out;
}

absl::StatusOr<LossValue> MarginLoss(const BatchTensors& batch,
                                     const MarginState& state) {
  absl::StatusOr<LossValue> positive = PositiveMarginLoss(batch, state);
  if (!positive.ok()) return positive.status();
  absl::StatusOr<LossValue> negative = NegativeMarginLoss(batch, state);
  if (!negative.ok()) return negative.status();
  positive->value += negative->value;
  positive->grads.Add(negative->grads);
  positive->hinge_active.insert(positive->hinge_active.end(),
                                negative->hinge_active.begin(),
                                negative->hinge_active.end());
  positive->hinge_margins.insert(positive->hinge_margins.end(),
                                 negative->hinge_margins.begin(),
                                 negative->hinge_margins.end());
  return positive;
}

absl::StatusOr<LossBreakdown> TotalLoss(const BatchTensors& batch,
                                        const MarginState& state,
                                        const LossSwitches& switches) {
  LossBreakdown out;
  absl::StatusOr<LossValue> cont = ContrastiveLoss(batch, switches.use_negatives);
  if (!cont.ok()) return cont.status();
  out.l_cont = cont->value;
  out.grads = std::move(cont->grads);

  if (switches.use_mhnl) {
    absl::StatusOr<LossValue> visual = VisualNegativeLoss(batch);
    if (!visual.ok()) return visual.status();
    absl::StatusOr<LossValue> textual = TextualNegativeLoss(batch);
    if (!textual.ok()) return textual.status();
    out.l_neg_visual = visual->value;
    out.l_neg_textual = textual->value;
    out.grads.Add(visual->grads);
    out.grads.Add(textual->grads);
  }
  out.l_neg = out.l_neg_visual + out.l_neg_textual;

  if (switches.use_dmcl) {
    absl::StatusOr<LossValue> positive = PositiveMarginLoss(batch, state);
    if (!positive.ok()) return positive.status();
    absl::StatusOr<LossValue> negative = NegativeMarginLoss(batch, state);
    if (!negative.ok()) return negative.status();
    out.l_mar_pos = positive->value;
    out.l_mar_neg = negative->value;
    out.grads.Add(positive->grads);
    out.grads.Add(negative->grads);
    out.hinge_active = std::move(positive->hinge_active);
    out.hinge_active.insert(out.hinge_active.end(),
                            negative->hinge_active.begin(),
                            negative->hinge_active.end());
    out.hinge_margins = std::move(positive->hinge_margins);
    out.hinge_margins.insert(out.hinge_margins.end(),
                             negative->hinge_margins.begin(),
                             negative->hinge_margins.end());
  }
  out.l_mar = out.l_mar_pos + out.l_mar_neg;
  out.l_total = out.l_cont + out.l_neg + out.l_mar;
  if (!out.AllFinite()) {
    return absl::InternalError("non-finite loss value");
  }
  return out;
}

const std::vector<LossTerm>& AllLossTerms() {
  static const auto* const kTerms = new std::vector<LossTerm>{
      LossTerm::kContrastive,    LossTerm::kVisualNegative,
      LossTerm::kTextualNegative, LossTerm::kPositiveMargin,
      LossTerm::kNegativeMargin, LossTerm::kTotal};
  return *kTerms;
}

std::string LossTermName(LossTerm term) {
  switch (term) {
    case LossTerm::kContrastive:
      return "l_cont";
    case LossTerm::kVisualNegative:
      return "l_neg_visual";
    case LossTerm::kTextualNegative:
      return "l_neg_textual";
    case LossTerm::kPositiveMargin:
      return "l_mar_pos";
    case LossTerm::kNegativeMargin:
      return "l_mar_neg";
    case LossTerm::kTotal:
      return "l_total";
  }
  return "";
}

absl::StatusOr<LossValue> EvaluateLossTerm(LossTerm term,
                                           const BatchTensors& batch,
                                           const MarginState& state,
                                           const LossSwitches& switches) {
  switch (term) {
    case LossTerm::kContrastive:
      return ContrastiveLoss(batch, switches.use_negatives);
    case LossTerm::kVisualNegative:
      return VisualNegativeLoss(batch);
    case LossTerm::kTextualNegative:
      return TextualNegativeLoss(batch);
    case LossTerm::kPositiveMargin:
      return PositiveMarginLoss(batch, state);
    case LossTerm::kNegativeMargin:
      return NegativeMarginLoss(batch, state);
    case LossTerm::kTotal: {
      absl::StatusOr<LossBreakdown> total = TotalLoss(batch, state, switches);
      if (!total.ok()) return total.status();
      LossValue out;
      out.value = total->l_total;
      out.grads = std::move(total->grads);
      out.hinge_active = std::move(total->hinge_active);
      out.hinge_margins = std::move(total->hinge_margins);
      return out;
    }
  }
  return absl::InvalidArgumentError("unknown loss term");
}

SimilarityCache CollectSimilarities(const BatchTensors& batch) {
  SimilarityCache cache;
  cache.positive.reserve(batch.size());
  cache.negative.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto image = batch.images[i].values();
    cache.positive.push_back(CosineUnchecked(image, batch.texts[i].values()));
    for (const EmbeddingVector& neg : batch.text_negatives[i]) {
      cache.negative[i].push_back(CosineUnchecked(image, neg.values()));
    }
  }
  return cache;
}

absl::StatusOr<MarginState> UpdateAdaptiveThresholds(
    const SimilarityCache& prev, MarginState state) {
  const std::size_t n = prev.positive.size();
  if (n == 0 || prev.negative.size() != n) {
    return absl::InvalidArgumentError(
        "similarity cache needs one positive and one negative row per sample");
  }
  const std::size_t slots = prev.num_slots();
  for (const auto& row : prev.negative) {
    if (row.size() != slots) {
      return absl::InvalidArgumentError(
          "similarity cache has a ragged slot count");
    }
  }
  if (slots != state.thresholds.size()) {
    LOG(WARNING) << "negative slot count changed from "
                 << state.thresholds.size() << " to " << slots
                 << "; unmatched slots reinitialized to 0";
  }
  std::vector<double> thresholds(std::max(slots, state.thresholds.size()),
                                 0.0);
  for (std::size_t slot = 0; slot < slots; ++slot) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += prev.positive[i] - prev.negative[i][slot];
    }
    thresholds[slot] = sum / static_cast<double>(n);
  }
  state.thresholds = std::move(thresholds);
  ++state.step;
  return state;
}

}  // namespace ahnpl
