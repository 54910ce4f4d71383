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

#include "ahnpl/eval_harness.h"

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "ahnpl/visual_perturbation.h"

namespace ahnpl {
namespace {

absl::StatusOr<EmbeddingVector> EncodeCaption(
    const EncoderParams& params, const Vocabulary& vocab,
    const std::vector<std::string>& tokens) {
  const std::vector<int> ids = vocab.Encode(tokens);
  return EncodeText(params, ids);
}

absl::StatusOr<double> CosineDistance(const EmbeddingVector& a,
                                      const EmbeddingVector& b) {
  absl::StatusOr<double> s = CosineSimilarity(a, b);
  if (!s.ok()) return s.status();
  return 1.0 - *s;
}

}  // namespace

absl::StatusOr<double> ScorePair(const EncoderParams& params,
                                 const Vocabulary& vocab,
                                 const std::vector<std::string>& caption,
                                 std::span<const double> image_features) {
  absl::StatusOr<EmbeddingVector> text = EncodeCaption(params, vocab, caption);
  if (!text.ok()) return text.status();
  absl::StatusOr<EmbeddingVector> image = EncodeImage(params, image_features);
  if (!image.ok()) return image.status();
  return CosineSimilarity(*text, *image);
}

absl::StatusOr<EvalReport> EvaluateChoice(const EncoderParams& params,
                                          const Vocabulary& vocab,
                                          std::span<const ChoiceItem> items) {
  EvalReport report;
  std::map<ChoiceCategory, CategoryAccuracy> by_category;
  for (const ChoiceItem& item : items) {
    absl::StatusOr<EmbeddingVector> image =
        EncodeImage(params, item.image_features);
    if (!image.ok()) return image.status();
    absl::StatusOr<EmbeddingVector> positive =
        EncodeCaption(params, vocab, item.positive.tokens);
    if (!positive.ok()) return positive.status();
    absl::StatusOr<EmbeddingVector> negative =
        EncodeCaption(params, vocab, item.negative.tokens);
    if (!negative.ok()) return negative.status();
    absl::StatusOr<double> s_pos = CosineSimilarity(*positive, *image);
    if (!s_pos.ok()) return s_pos.status();
    absl::StatusOr<double> s_neg = CosineSimilarity(*negative, *image);
    if (!s_neg.ok()) return s_neg.status();

    const bool correct = *s_pos > *s_neg;
    CategoryAccuracy& c = by_category[item.category];
    c.category = CategoryName(item.category);
    ++c.count;
    c.correct += correct ? 1 : 0;
    ++report.total;
    report.correct += correct ? 1 : 0;
    report.items.push_back({item.id, CategoryName(item.category), *s_pos,
                            *s_neg, *s_pos - *s_neg});
  }
  for (ChoiceCategory category : AllCategories()) {
    auto it = by_category.find(category);
    if (it == by_category.end()) continue;
    CategoryAccuracy c = it->second;
    c.accuracy = static_cast<double>(c.correct) / c.count;
    report.categories.push_back(c);
  }
  report.overall_accuracy =
      report.total == 0 ? 0.0
                        : static_cast<double>(report.correct) / report.total;
  return report;
}

double AccuracyFromMargins(const EvalReport& report) {
  if (report.items.empty()) return 0.0;
  int correct = 0;
  for (const ItemMargin& m : report.items) correct += m.margin > 0.0 ? 1 : 0;
  return static_cast<double>(correct) / report.items.size();
}

absl::Status WriteEvalCsv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "category,count,accuracy\n";
  for (const CategoryAccuracy& c : report.categories) {
    out << c.category << ',' << c.count << ',' << FormatReal(c.accuracy)
        << '\n';
  }
  out << "ALL," << report.total << ',' << FormatReal(report.overall_accuracy)
      << '\n';
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::Status WriteItemTsv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "item_id\tcategory\tpositive_score\tnegative_score\tmargin\n";
  for (const ItemMargin& m : report.items) {
    out << m.id << '\t' << m.category << '\t' << FormatReal(m.positive_score)
        << '\t' << FormatReal(m.negative_score) << '\t'
        << FormatReal(m.margin) << '\n';
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<DistanceRow> ComputeDistanceRow(
    const std::string& id, const EmbeddingVector& image,
    const EmbeddingVector& text, const EmbeddingVector& negative_text) {
  const EmbeddingVector negatives[] = {negative_text};
  absl::StatusOr<VisualNegativeSet> shifted =
      BuildVisualNegatives(image, text, negatives);
  if (!shifted.ok()) return shifted.status();
  const EmbeddingVector& negative_image = shifted->negatives[0].embedding;

  DistanceRow row;
  row.id = id;
  struct Pair {
    const EmbeddingVector* a;
    const EmbeddingVector* b;
    double* out;
  };
  const Pair pairs[] = {
      {&image, &text, &row.image_text},
      {&image, &negative_text, &row.image_negative_text},
      {&image, &negative_image, &row.image_negative_image},
      {&text, &negative_text, &row.text_negative_text},
      {&text, &negative_image, &row.text_negative_image},
      {&negative_text, &negative_image, &row.negative_text_negative_image},
  };
  for (const Pair& p : pairs) {
    absl::StatusOr<double> d = CosineDistance(*p.a, *p.b);
    if (!d.ok()) return d.status();
    *p.out = *d;
  }
  return row;
}

absl::StatusOr<std::vector<DistanceRow>> DistanceReport(
    const EncoderParams& params, const Vocabulary& vocab,
    std::span<const ChoiceItem> items) {
  std::vector<DistanceRow> rows;
  rows.reserve(items.size());
  for (const ChoiceItem& item : items) {
    absl::StatusOr<EmbeddingVector> image =
        EncodeImage(params, item.image_features);
    if (!image.ok()) return image.status();
    absl::StatusOr<EmbeddingVector> text =
        EncodeCaption(params, vocab, item.positive.tokens);
    if (!text.ok()) return text.status();
    absl::StatusOr<EmbeddingVector> negative =
        EncodeCaption(params, vocab, item.negative.tokens);
    if (!negative.ok()) return negative.status();
    absl::StatusOr<DistanceRow> row =
        ComputeDistanceRow(item.id, *image, *text, *negative);
    if (!row.ok()) return row.status();
    rows.push_back(*std::move(row));
  }
  return rows;
}

DistanceRow MeanDistances(std::span<const DistanceRow> rows) {
  DistanceRow mean;
  mean.id = "MEAN";
  if (rows.empty()) return mean;
  for (const DistanceRow& r : rows) {
    mean.image_text += r.image_text;
    mean.image_negative_text += r.image_negative_text;
    mean.image_negative_image += r.image_negative_image;
    mean.text_negative_text += r.text_negative_text;
    mean.text_negative_image += r.text_negative_image;
    mean.negative_text_negative_image += r.negative_text_negative_image;
  }
  const double inv = 1.0 / rows.size();
  mean.image_text *= inv;
  mean.image_negative_text *= inv;
  mean.image_negative_image *= inv;
  mean.text_negative_text *= inv;
  mean.text_negative_image *= inv;
  mean.negative_text_negative_image *= inv;
  return mean;
}

absl::Status WriteDistanceTsv(const std::string& path,
                              std::span<const DistanceRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "id\td_img_txt\td_img_negtxt\td_img_negimg\td_txt_negtxt\t"
         "d_txt_negimg\td_negtxt_negimg\n";
  auto emit = [&](const DistanceRow& r) {
    out << r.id << '\t' << FormatReal(r.image_text) << '\t'
        << FormatReal(r.image_negative_text) << '\t'
        << FormatReal(r.image_negative_image) << '\t'
        << FormatReal(r.text_negative_text) << '\t'
        << FormatReal(r.text_negative_image) << '\t'
        << FormatReal(r.negative_text_negative_image) << '\n';
  };
  for (const DistanceRow& r : rows) emit(r);
  emit(MeanDistances(rows));
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

}  // namespace ahnpl
