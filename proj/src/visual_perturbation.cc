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

#include "ahnpl/visual_perturbation.h"

#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"

namespace ahnpl {
namespace {

absl::Status CheckDims(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension mismatch: ", a.dim(), " vs ", b.dim()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<EmbeddingVector> DeviationEmbedding(
    const EmbeddingVector& original_text,
    const EmbeddingVector& negative_text) {
  if (absl::Status s = CheckDims(original_text, negative_text); !s.ok()) {
    return s;
  }
  std::vector<double> delta(original_text.dim());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = negative_text[i] - original_text[i];
  }
  return EmbeddingVector(std::move(delta));
}

absl::StatusOr<EmbeddingVector> PerturbImageEmbedding(
    const EmbeddingVector& original_image, const EmbeddingVector& delta) {
  if (absl::Status s = CheckDims(original_image, delta); !s.ok()) return s;
  std::vector<double> out(original_image.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = original_image[i] + delta[i];
  }
  return EmbeddingVector(std::move(out));
}

absl::StatusOr<VisualNegativeSet> BuildVisualNegatives(
    const EmbeddingVector& original_image, const EmbeddingVector& original_text,
    std::span<const EmbeddingVector> textual_negatives) {
  if (absl::Status s = CheckDims(original_image, original_text); !s.ok()) {
    return s;
  }
  VisualNegativeSet set;
  set.negatives.reserve(textual_negatives.size());
  for (std::size_t n = 0; n < textual_negatives.size(); ++n) {
    absl::StatusOr<EmbeddingVector> delta =
        DeviationEmbedding(original_text, textual_negatives[n]);
    if (!delta.ok()) return delta.status();
    absl::StatusOr<EmbeddingVector> shifted =
        PerturbImageEmbedding(original_image, *delta);
    if (!shifted.ok()) return shifted.status();
    set.negatives.push_back({*std::move(shifted), static_cast<int>(n)});
  }
  return set;
}

void BackpropVisualNegative(std::span<const double> grad_visual_negative,
                            std::span<double> grad_image,
                            std::span<double> grad_original_text,
                            std::span<double> grad_negative_text,
                            bool detach_text) {
  for (std::size_t i = 0; i < grad_visual_negative.size(); ++i) {
    const double g = grad_visual_negative[i];
    grad_image[i] += g;
    if (!detach_text) {
      grad_negative_text[i] += g;
      grad_original_text[i] -= g;
    }
  }
}

}  // namespace ahnpl
