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

// Visual hard negatives by semantic shift: the text-side deviation
// e_neg_text - e_orig_text is added to the original image embedding. All
// vectors are raw encoder outputs; nothing is renormalized.

#ifndef AHNPL_VISUAL_PERTURBATION_H_
#define AHNPL_VISUAL_PERTURBATION_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ahnpl/embedding.h"

namespace ahnpl {

struct VisualNegative {
  EmbeddingVector embedding;
  int slot = 0;  // Matches the slot of the inducing textual negative.
};

struct VisualNegativeSet {
  std::string source_image_id;
  std::vector<VisualNegative> negatives;

  std::size_t size() const { return negatives.size(); }
};

// negative_text - original_text.
absl::StatusOr<EmbeddingVector> DeviationEmbedding(
    const EmbeddingVector& original_text, const EmbeddingVector& negative_text);

// original_image + delta.
absl::StatusOr<EmbeddingVector> PerturbImageEmbedding(
    const EmbeddingVector& original_image, const EmbeddingVector& delta);

// One visual negative per textual negative, slot n built from
// textual_negatives[n].
absl::StatusOr<VisualNegativeSet> BuildVisualNegatives(
    const EmbeddingVector& original_image, const EmbeddingVector& original_text,
    std::span<const EmbeddingVector> textual_negatives);

// Routes the gradient of a visual negative back to its three inputs:
// +g to the image and the negative text, -g to the original text. With
// detach_text set only the image receives gradient.
void BackpropVisualNegative(std::span<const double> grad_visual_negative,
                            std::span<double> grad_image,
                            std::span<double> grad_original_text,
                            std::span<double> grad_negative_text,
                            bool detach_text);

}  // namespace ahnpl

#endif  // AHNPL_VISUAL_PERTURBATION_H_
