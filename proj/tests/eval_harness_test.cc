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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

namespace ahnpl {
namespace {

constexpr double kTol = 1e-12;
const SceneVocabSizes kSizes;

Vocabulary SceneVocabulary() {
  Vocabulary v;
  v.Add("a");
  for (int i = 0; i < kSizes.objects; ++i) v.Add(ObjectWords()[i]);
  for (int i = 0; i < kSizes.attributes; ++i) v.Add(AttributeWords()[i]);
  for (int i = 0; i < kSizes.relations; ++i) v.Add(RelationWords()[i]);
  return v;
}

// Encoder whose text embedding of a true caption is parallel to the
// noiseless image features of its scene: token rows hold the word's one-hot
// slot in every block of its class, position rows select the block of the
// template role at that position, and both projections are identities.
EncoderParams OracleEncoder(const Vocabulary& vocab) {
  const int f = kSizes.FeatureDim();
  EncoderConfig c;
  c.variant = TextEncoderVariant::kPositionAware;
  c.vocab_size = vocab.size();
  c.hidden_dim = f;
  c.embed_dim = f;
  c.feature_dim = f;
  c.max_length = 8;
  EncoderParams p = EncoderParams::Zeros(c);
  const int obj1 = 0;
  const int att1 = obj1 + kSizes.objects;
  const int rel = att1 + kSizes.attributes;
  const int obj2 = rel + kSizes.relations;
  const int att2 = obj2 + kSizes.objects;
  for (int i = 0; i < kSizes.objects; ++i) {
    auto row = p.token_embedding.row(vocab.Lookup(ObjectWords()[i]));
    row[obj1 + i] = row[obj2 + i] = 1.0;
  }
  for (int i = 0; i < kSizes.attributes; ++i) {
    auto row = p.token_embedding.row(vocab.Lookup(AttributeWords()[i]));
    row[att1 + i] = row[att2 + i] = 1.0;
  }
  for (int i = 0; i < kSizes.relations; ++i) {
    p.token_embedding.row(vocab.Lookup(RelationWords()[i]))[rel + i] = 1.0;
  }
  auto select = [&](int position, int start, int width) {
    for (int k = start; k < start + width; ++k) {
      p.position_embedding.row(position)[k] = 1.0;
    }
  };
  select(1, att1, kSizes.attributes);
  select(2, obj1, kSizes.objects);
  select(3, rel, kSizes.relations);
  select(5, att2, kSizes.attributes);
  select(6, obj2, kSizes.objects);
  for (int k = 0; k < f; ++k) {
    p.text_projection.row(k)[k] = 1.0;
    p.image_projection.row(k)[k] = 1.0;
  }
  return p;
}

TEST(ScorePairTest, IdenticalEmbeddingsScoreOne) {
  EncoderConfig c;
  c.vocab_size = 3;
  c.hidden_dim = 2;
  c.embed_dim = 3;
  c.feature_dim = 2;
  EncoderParams p = EncoderParams::Zeros(c);
  p.text_bias.values = {0.2, -0.5, 1.0};
  p.image_bias.values = p.text_bias.values;
  Vocabulary v;
  v.Add("x");
  absl::StatusOr<double> s = ScorePair(p, v, {"x"}, std::vector<double>{1, 2});
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(*s, 1.0, kTol);
}

TEST(ScorePairTest, InvariantToPositiveRescaling) {
  Vocabulary v = SceneVocabulary();
  EncoderConfig c;
  c.vocab_size = v.size();
  c.feature_dim = kSizes.FeatureDim();
  Rng rng = MakeStream(1, "init");
  EncoderParams p = *InitParams(c, rng);
  const std::vector<std::string> caption = {"a", AttributeWords()[0],
                                            ObjectWords()[1]};
  std::vector<double> x(c.feature_dim);
  for (double& f : x) f = StandardNormal(rng);
  const double base = *ScorePair(p, v, caption, x);
  EncoderParams scaled = p;
  for (double& w : scaled.text_projection.values) w *= 3.5;
  for (double& w : scaled.text_bias.values) w *= 3.5;
  for (double& w : scaled.image_projection.values) w *= 0.25;
  for (double& w : scaled.image_bias.values) w *= 0.25;
  EXPECT_NEAR(*ScorePair(scaled, v, caption, x), base, kTol);
}

TEST(ScorePairTest, MatchesManualComposition) {
  Vocabulary v = SceneVocabulary();
  EncoderConfig c;
  c.vocab_size = v.size();
  c.feature_dim = kSizes.FeatureDim();
  Rng rng = MakeStream(2, "init");
  EncoderParams p = *InitParams(c, rng);
  const std::vector<std::string> caption = {"a", AttributeWords()[2],
                                            ObjectWords()[3], RelationWords()[1]};
  std::vector<double> x(c.feature_dim);
  for (double& f : x) f = StandardNormal(rng);
  EmbeddingVector t = *EncodeText(p, v.Encode(caption));
  EmbeddingVector i = *EncodeImage(p, x);
  EXPECT_EQ(*ScorePair(p, v, caption, x), *CosineSimilarity(t, i));
}

TEST(EvaluateChoiceTest, OracleEncoderIsPerfect) {
  Vocabulary v = SceneVocabulary();
  EncoderParams p = OracleEncoder(v);
  Rng rng = MakeStream(3, "data");
  std::vector<ChoiceItem> items =
      *BuildBenchmark(600, AllCategories(), kSizes, 0.0, rng);
  absl::StatusOr<EvalReport> r = EvaluateChoice(p, v, items);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->overall_accuracy, 1.0);
  EXPECT_EQ(r->correct, 600);
  for (const ItemMargin& m : r->items) EXPECT_NEAR(m.positive_score, 1.0, kTol);
}

TEST(EvaluateChoiceTest, CategoryCountsMatchComposition) {
  Vocabulary v = SceneVocabulary();
  EncoderConfig c;
  c.vocab_size = v.size();
  c.feature_dim = kSizes.FeatureDim();
  Rng rng = MakeStream(4, "init");
  EncoderParams p = *InitParams(c, rng);
  std::vector<ChoiceItem> items =
      *BuildBenchmark(125, AllCategories(), kSizes, 0.05, rng);
  EvalReport r = *EvaluateChoice(p, v, items);
  std::map<std::string, int> want;
  for (const ChoiceItem& item : items) ++want[CategoryName(item.category)];
  int sum = 0;
  ASSERT_EQ(r.categories.size(), AllCategories().size());
  for (std::size_t k = 0; k < r.categories.size(); ++k) {
    EXPECT_EQ(r.categories[k].category, CategoryName(AllCategories()[k]));
    EXPECT_EQ(r.categories[k].count, want[r.categories[k].category]);
    EXPECT_GE(r.categories[k].accuracy, 0.0);
    EXPECT_LE(r.categories[k].accuracy, 1.0);
    sum += r.categories[k].count;
  }
  EXPECT_EQ(sum, r.total);
  EXPECT_EQ(r.total, 125);
  EXPECT_EQ(AccuracyFromMargins(r), r.overall_accuracy);
  for (const ItemMargin& m : r.items) {
    EXPECT_EQ(m.margin, m.positive_score - m.negative_score);
  }
}

TEST(EvaluateChoiceTest, TiesAreIncorrect) {
  EncoderConfig c;
  c.vocab_size = 3;
  c.hidden_dim = 2;
  c.embed_dim = 2;
  c.feature_dim = 2;
  EncoderParams p = EncoderParams::Zeros(c);
  p.text_bias.values = {1.0, 0.0};
  p.image_bias.values = {1.0, 1.0};
  Vocabulary v;
  ChoiceItem item;
  item.id = "tie";
  item.category = ChoiceCategory::kReplaceRel;
  item.image_features = {0.0, 0.0};
  item.positive.tokens = {"x"};
  item.negative.tokens = {"y"};
  EvalReport r = *EvaluateChoice(p, v, std::vector<ChoiceItem>{item});
  EXPECT_EQ(r.correct, 0);
  EXPECT_EQ(r.items[0].margin, 0.0);
}

TEST(EvaluateChoiceTest, UntrainedEncoderNearChance) {
  Vocabulary v = SceneVocabulary();
  EncoderConfig c;
  c.vocab_size = v.size();
  c.feature_dim = kSizes.FeatureDim();
  Rng data = MakeStream(5, "data");
  std::vector<ChoiceItem> items =
      *BuildBenchmark(600, AllCategories(), kSizes, 0.05, data);
  // One encoder makes correlated choices across items sharing tokens, so
  // the band applies to the pooled accuracy of several encoders.
  double sum = 0.0;
  for (int seed = 1; seed <= 10; ++seed) {
    Rng rng = MakeStream(seed, "init");
    EncoderParams p = *InitParams(c, rng);
    EvalReport r = *EvaluateChoice(p, v, items);
    EXPECT_GT(r.overall_accuracy, 0.3);
    EXPECT_LT(r.overall_accuracy, 0.7);
    sum += r.overall_accuracy;
  }
  EXPECT_NEAR(sum / 10.0, 0.5, 0.05);
}

TEST(EvalCsvTest, Format) {
  Vocabulary v = SceneVocabulary();
  EncoderParams p = OracleEncoder(v);
  Rng rng = MakeStream(6, "data");
  std::vector<ChoiceItem> items =
      *BuildBenchmark(12, AllCategories(), kSizes, 0.0, rng);
  EvalReport r = *EvaluateChoice(p, v, items);
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "eval.csv").string();
  ASSERT_TRUE(WriteEvalCsv(path, r).ok());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(),
            "category,count,accuracy\nSWAP_OBJ,2,1\nSWAP_ATT,2,1\n"
            "REPLACE_REL,2,1\nREPLACE_ATT,2,1\nREPLACE_OBJ,2,1\nADD_ATT,2,1\n"
            "ALL,12,1\n");
}

TEST(DistanceTest, IdenticalNegativeTextGivesZeroImageShift) {
  EmbeddingVector image = {0.3, -1.0, 2.0};
  EmbeddingVector text = {1.0, 0.5, 0.25};
  absl::StatusOr<DistanceRow> row = ComputeDistanceRow("x", image, text, text);
  ASSERT_TRUE(row.ok());
  EXPECT_NEAR(row->image_negative_image, 0.0, kTol);
  EXPECT_NEAR(row->text_negative_text, 0.0, kTol);
  EXPECT_EQ(row->image_text, row->image_negative_text);
}

TEST(DistanceTest, MatchesOneMinusCosineAndIsSymmetric) {
  Rng rng = MakeStream(7, "test");
  auto vec = [&] {
    std::vector<double> v(5);
    for (double& x : v) x = StandardNormal(rng);
    return EmbeddingVector(v);
  };
  for (int t = 0; t < 20; ++t) {
    EmbeddingVector i = vec(), tx = vec(), tn = vec();
    EmbeddingVector in(std::vector<double>(5));
    for (int d = 0; d < 5; ++d) in[d] = i[d] + (tn[d] - tx[d]);
    DistanceRow r = *ComputeDistanceRow("x", i, tx, tn);
    EXPECT_NEAR(r.image_text, 1.0 - *CosineSimilarity(tx, i), kTol);
    EXPECT_NEAR(r.image_negative_text, 1.0 - *CosineSimilarity(tn, i), kTol);
    EXPECT_NEAR(r.image_negative_image, 1.0 - *CosineSimilarity(in, i), kTol);
    EXPECT_NEAR(r.text_negative_text, 1.0 - *CosineSimilarity(tn, tx), kTol);
    EXPECT_NEAR(r.text_negative_image, 1.0 - *CosineSimilarity(in, tx), kTol);
    EXPECT_NEAR(r.negative_text_negative_image,
                1.0 - *CosineSimilarity(in, tn), kTol);
  }
}

TEST(DistanceTest, MeanIsColumnwise) {
  std::vector<DistanceRow> rows = {{"a", 0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                                   {"b", 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}};
  DistanceRow m = MeanDistances(rows);
  EXPECT_NEAR(m.image_text, 0.2, kTol);
  EXPECT_NEAR(m.negative_text_negative_image, 0.7, kTol);
}

TEST(DistanceTest, ReportCoversEveryItem) {
  Vocabulary v = SceneVocabulary();
  EncoderParams p = OracleEncoder(v);
  Rng rng = MakeStream(8, "data");
  std::vector<ChoiceItem> items =
      *BuildBenchmark(30, AllCategories(), kSizes, 0.0, rng);
  absl::StatusOr<std::vector<DistanceRow>> rows = DistanceReport(p, v, items);
  ASSERT_TRUE(rows.ok());
  ASSERT_EQ(rows->size(), items.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    EXPECT_EQ((*rows)[k].id, items[k].id);
    // The oracle encoder aligns images with their true captions.
    EXPECT_NEAR((*rows)[k].image_text, 0.0, kTol);
    EXPECT_GT((*rows)[k].image_negative_text, (*rows)[k].image_text);
  }
}

}  // namespace
}  // namespace ahnpl
