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

// Binary-choice evaluation and embedding distance reports.

#ifndef AHNPL_EVAL_HARNESS_H_
#define AHNPL_EVAL_HARNESS_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/encoders.h"
#include "ahnpl/synthetic_data.h"

namespace ahnpl {

// Cosine similarity between the encoded caption and encoded image.
absl::StatusOr<double> ScorePair(const EncoderParams& params,
                                 const Vocabulary& vocab,
                                 const std::vector<std::string>& caption,
                                 std::span<const double> image_features);

struct CategoryAccuracy {
  std::string category;
  int count = 0;
  int correct = 0;
  double accuracy = 0.0;
};

struct ItemMargin {
  std::string id;
  std::string category;
  double positive_score = 0.0;
  double negative_score = 0.0;
  double margin = 0.0;  // positive_score - negative_score
};

struct EvalReport {
  std::vector<CategoryAccuracy> categories;  // In AllCategories() order.
  int total = 0;
  int correct = 0;
  double overall_accuracy = 0.0;
  std::vector<ItemMargin> items;
};

// An item counts as correct iff S(I, T+) > S(I, T-); ties are incorrect.
// Categories with no items are omitted.
absl::StatusOr<EvalReport> EvaluateChoice(const EncoderParams& params,
                                          const Vocabulary& vocab,
                                          std::span<const ChoiceItem> items);

// Recomputes overall accuracy from the per-item margins.
double AccuracyFromMargins(const EvalReport& report);

// "category,count,accuracy" rows, then an ALL row.
absl::Status WriteEvalCsv(const std::string& path, const EvalReport& report);
absl::Status WriteItemTsv(const std::string& path, const EvalReport& report);

// Cosine distances (1 - cosine similarity) among the original image, the
// original caption, the negative caption and the shifted image embedding
// image + (negative_text - text).
struct DistanceRow {
  std::string id;
  double image_text = 0.0;
  double image_negative_text = 0.0;
  double image_negative_image = 0.0;
  double text_negative_text = 0.0;
  double text_negative_image = 0.0;
  double negative_text_negative_image = 0.0;
};

absl::StatusOr<DistanceRow> ComputeDistanceRow(
    const std::string& id, const EmbeddingVector& image,
    const EmbeddingVector& text, const EmbeddingVector& negative_text);

absl::StatusOr<std::vector<DistanceRow>> DistanceReport(
    const EncoderParams& params, const Vocabulary& vocab,
    std::span<const ChoiceItem> items);

// Column-wise mean.
DistanceRow MeanDistances(std::span<const DistanceRow> rows);

absl::Status WriteDistanceTsv(const std::string& path,
                              std::span<const DistanceRow> rows);

}  // namespace ahnpl

#endif  // AHNPL_EVAL_HARNESS_H_
