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

#include "ahnpl/encoders.h"

#include <filesystem>
#include <vector>

#include "gtest/gtest.h"

namespace ahnpl {
namespace {

constexpr double kTol = 1e-12;

EncoderConfig SmallConfig(TextEncoderVariant variant) {
  EncoderConfig c;
  c.variant = variant;
  c.vocab_size = 9;
  c.hidden_dim = 5;
  c.embed_dim = 4;
  c.feature_dim = 6;
  c.max_length = 7;
  return c;
}

EncoderParams RandomParams(TextEncoderVariant variant, std::uint64_t seed) {
  Rng rng = MakeStream(seed, "init");
  EncoderParams p = *InitParams(SmallConfig(variant), rng);
  for (double& v : p.text_bias.values) v = StandardNormal(rng);
  for (double& v : p.image_bias.values) v = StandardNormal(rng);
  return p;
}

// Hand-rolled forward pass: hidden = mean_p E[w_p] (* P[p]), out = hW + b.
std::vector<double> OracleText(const EncoderParams& p,
                               const std::vector<int>& ids) {
  const int H = p.config.hidden_dim, D = p.config.embed_dim;
  std::vector<long double> h(H, 0.0L);
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    for (int k = 0; k < H; ++k) {
      long double e = p.token_embedding.values[ids[pos] * H + k];
      if (p.config.variant == TextEncoderVariant::kPositionAware) {
        e *= p.position_embedding.values[pos * H + k];
      }
      h[k] += e;
    }
  }
  for (long double& x : h) x /= ids.size();
  std::vector<double> out(D);
  for (int d = 0; d < D; ++d) {
    long double s = p.text_bias.values[d];
    for (int k = 0; k < H; ++k) s += h[k] * p.text_projection.values[k * D + d];
    out[d] = static_cast<double>(s);
  }
  return out;
}

std::vector<double> OracleImage(const EncoderParams& p,
                                const std::vector<double>& x) {
  const int F = p.config.feature_dim, D = p.config.embed_dim;
  std::vector<double> out(D);
  for (int d = 0; d < D; ++d) {
    long double s = p.image_bias.values[d];
    for (int f = 0; f < F; ++f) s += x[f] * p.image_projection.values[f * D + d];
    out[d] = static_cast<double>(s);
  }
  return out;
}

void ExpectNear(const EmbeddingVector& got, const std::vector<double>& want) {
  ASSERT_EQ(got.dim(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], kTol);
}

TEST(InitParamsTest, SameSeedIdentical) {
  EncoderParams a = RandomParams(TextEncoderVariant::kPositionAware, 3);
  EncoderParams b = RandomParams(TextEncoderVariant::kPositionAware, 3);
  auto ab = a.Blocks();
  auto bb = b.Blocks();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_EQ(ab[i]->values, bb[i]->values);
  }
}

TEST(InitParamsTest, DifferentSeedsDiffer) {
  EncoderParams a = RandomParams(TextEncoderVariant::kPositionAware, 3);
  EncoderParams b = RandomParams(TextEncoderVariant::kPositionAware, 4);
  EXPECT_NE(a.token_embedding.values, b.token_embedding.values);
  EXPECT_NE(a.image_projection.values, b.image_projection.values);
}

TEST(InitParamsTest, ShapesMatchConfig) {
  Rng rng = MakeStream(1, "init");
  const EncoderConfig c = SmallConfig(TextEncoderVariant::kPositionAware);
  EncoderParams p = *InitParams(c, rng);
  auto shape = [](const ParamBlock& b) { return std::pair(b.rows, b.cols); };
  EXPECT_EQ(shape(p.token_embedding), std::pair(9, 5));
  EXPECT_EQ(shape(p.position_embedding), std::pair(7, 5));
  EXPECT_EQ(shape(p.text_projection), std::pair(5, 4));
  EXPECT_EQ(shape(p.text_bias), std::pair(1, 4));
  EXPECT_EQ(shape(p.image_projection), std::pair(6, 4));
  EXPECT_EQ(shape(p.image_bias), std::pair(1, 4));
  for (const ParamBlock* b : p.Blocks()) {
    EXPECT_EQ(b->values.size(), static_cast<std::size_t>(b->rows * b->cols));
  }
  for (double v : p.text_bias.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(p.NumValues(), 9u * 5 + 7 * 5 + 5 * 4 + 4 + 6 * 4 + 4);
}

TEST(InitParamsTest, ZeroDimsRejected) {
  EncoderConfig c = SmallConfig(TextEncoderVariant::kBagOfTokens);
  c.embed_dim = 0;
  Rng rng = MakeStream(1, "init");
  EXPECT_FALSE(InitParams(c, rng).ok());
}

TEST(InitParamsTest, ScaleIsInverseSqrtFanIn) {
  EncoderConfig c;
  c.vocab_size = 10;
  c.hidden_dim = 400;
  c.embed_dim = 50;
  c.feature_dim = 100;
  Rng rng = MakeStream(2, "init");
  EncoderParams p = *InitParams(c, rng);
  auto variance = [](const std::vector<double>& v) {
    double s = 0, s2 = 0;
    for (double x : v) {
      s += x;
      s2 += x * x;
    }
    const double m = s / v.size();
    return s2 / v.size() - m * m;
  };
  EXPECT_NEAR(variance(p.text_projection.values), 1.0 / 400, 0.1 / 400);
  EXPECT_NEAR(variance(p.image_projection.values), 1.0 / 100, 0.1 / 100);
}

TEST(EncodeTextTest, SingleTokenIsProjectedEmbedding) {
  EncoderParams p = RandomParams(TextEncoderVariant::kBagOfTokens, 5);
  absl::StatusOr<EmbeddingVector> e = EncodeText(p, std::vector<int>{3});
  ASSERT_TRUE(e.ok());
  for (int d = 0; d < 4; ++d) {
    double want = p.text_bias.values[d];
    for (int k = 0; k < 5; ++k) {
      want += p.token_embedding.values[3 * 5 + k] *
              p.text_projection.values[k * 4 + d];
    }
    EXPECT_NEAR((*e)[d], want, kTol);
  }
}

TEST(EncodeTextTest, BagIsPermutationInvariant) {
  EncoderParams p = RandomParams(TextEncoderVariant::kBagOfTokens, 5);
  EmbeddingVector a = *EncodeText(p, std::vector<int>{1, 2, 7, 4});
  EmbeddingVector b = *EncodeText(p, std::vector<int>{7, 4, 1, 2});
  for (std::size_t d = 0; d < a.dim(); ++d) EXPECT_NEAR(a[d], b[d], kTol);
}

TEST(EncodeTextTest, PositionAwareSeesSwaps) {
  EncoderParams p = RandomParams(TextEncoderVariant::kPositionAware, 5);
  EmbeddingVector a = *EncodeText(p, std::vector<int>{1, 2, 7, 4});
  EmbeddingVector b = *EncodeText(p, std::vector<int>{1, 7, 2, 4});
  double diff = 0;
  for (std::size_t d = 0; d < a.dim(); ++d) diff += std::abs(a[d] - b[d]);
  EXPECT_GT(diff, 1e-6);
}

TEST(EncodeTextTest, RandomMatchesOracle) {
  for (TextEncoderVariant v :
       {TextEncoderVariant::kBagOfTokens, TextEncoderVariant::kPositionAware}) {
    EncoderParams p = RandomParams(v, 7);
    Rng rng = MakeStream(8, "test");
    for (int t = 0; t < 50; ++t) {
      std::vector<int> ids(1 + UniformIndex(rng, 7));
      for (int& id : ids) id = static_cast<int>(UniformIndex(rng, 9));
      ExpectNear(*EncodeText(p, ids), OracleText(p, ids));
    }
  }
}

TEST(EncodeTextTest, Errors) {
  EncoderParams p = RandomParams(TextEncoderVariant::kPositionAware, 5);
  EXPECT_FALSE(EncodeText(p, std::vector<int>{}).ok());
  EXPECT_FALSE(EncodeText(p, std::vector<int>{9}).ok());
  EXPECT_FALSE(EncodeText(p, std::vector<int>{-1}).ok());
  EXPECT_FALSE(EncodeText(p, std::vector<int>(8, 1)).ok());
}

TEST(EncodeImageTest, ZeroFeaturesGiveBias) {
  EncoderParams p = RandomParams(TextEncoderVariant::kBagOfTokens, 5);
  EmbeddingVector e = *EncodeImage(p, std::vector<double>(6, 0.0));
  EXPECT_EQ(e.vector(), p.image_bias.values);
}

TEST(EncodeImageTest, IdentityProjectionReproducesInput) {
  EncoderConfig c = SmallConfig(TextEncoderVariant::kBagOfTokens);
  c.feature_dim = 4;
  EncoderParams p = EncoderParams::Zeros(c);
  for (int i = 0; i < 4; ++i) p.image_projection.values[i * 4 + i] = 1.0;
  std::vector<double> x = {0.5, -1.25, 3.0, 0.0};
  EXPECT_EQ(EncodeImage(p, x)->vector(), x);
}

TEST(EncodeImageTest, RandomMatchesOracle) {
  EncoderParams p = RandomParams(TextEncoderVariant::kBagOfTokens, 9);
  Rng rng = MakeStream(10, "test");
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(6);
    for (double& v : x) v = StandardNormal(rng);
    ExpectNear(*EncodeImage(p, x), OracleImage(p, x));
  }
}

TEST(EncodeImageTest, DimMismatch) {
  EncoderParams p = RandomParams(TextEncoderVariant::kBagOfTokens, 5);
  EXPECT_FALSE(EncodeImage(p, std::vector<double>(5, 0.0)).ok());
}

// d(g . f(theta)) / d theta by central differences.
template <typename Forward>
void ExpectBackwardMatches(EncoderParams p, const std::vector<double>& g,
                           Forward forward, const EncoderGradients& analytic) {
  const double h = 1e-6;
  auto blocks = p.Blocks();
  auto grad_blocks = analytic.Blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b]->values.size(); ++i) {
      double& x = blocks[b]->values[i];
      const double orig = x;
      auto dot = [&] {
        EmbeddingVector e = forward(p);
        double s = 0;
        for (std::size_t d = 0; d < e.dim(); ++d) s += g[d] * e[d];
        return s;
      };
      x = orig + h;
      const double up = dot();
      x = orig - h;
      const double down = dot();
      x = orig;
      EXPECT_NEAR(grad_blocks[b]->values[i], (up - down) / (2 * h), 1e-7)
          << blocks[b]->name << "[" << i << "]";
    }
  }
}

TEST(BackwardTest, TextMatchesCentralDifferences) {
  for (TextEncoderVariant v :
       {TextEncoderVariant::kBagOfTokens, TextEncoderVariant::kPositionAware}) {
    EncoderParams p = RandomParams(v, 11);
    const std::vector<int> ids = {2, 5, 2, 8};
    const std::vector<double> g = {0.3, -1.1, 0.7, 2.0};
    EncoderGradients grads = EncoderParams::Zeros(p.config);
    BackwardText(p, ids, g, grads);
    ExpectBackwardMatches(
        p, g, [&](const EncoderParams& q) { return *EncodeText(q, ids); },
        grads);
  }
}

TEST(BackwardTest, ImageMatchesCentralDifferences) {
  EncoderParams p = RandomParams(TextEncoderVariant::kPositionAware, 12);
  const std::vector<double> x = {0.1, -0.4, 1.3, 0.0, 2.2, -0.9};
  const std::vector<double> g = {1.0, -0.5, 0.25, 0.8};
  EncoderGradients grads = EncoderParams::Zeros(p.config);
  BackwardImage(p, x, g, grads);
  ExpectBackwardMatches(
      p, g, [&](const EncoderParams& q) { return *EncodeImage(q, x); }, grads);
}

TEST(VocabularyTest, ReservedUnknown) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 1);
  EXPECT_EQ(v.Word(0), "<unk>");
  EXPECT_EQ(v.Add("cat"), 1);
  EXPECT_EQ(v.Add("cat"), 1);
  EXPECT_EQ(v.Lookup("dog"), Vocabulary::kUnknownId);
  EXPECT_EQ(v.Encode({"cat", "dog"}), (std::vector<int>{1, 0}));
}

TEST(CheckpointTest, RoundTripIsExact) {
  Checkpoint c;
  c.params = RandomParams(TextEncoderVariant::kPositionAware, 13);
  for (const char* w : {"a", "cat", "sees", "dog", "red", "blue", "on", "the"}) {
    c.vocab.Add(w);
  }
  c.margin_a = 0.3141592653589793;
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "c.ckpt").string();
  ASSERT_TRUE(SaveCheckpoint(path, c).ok());
  absl::StatusOr<Checkpoint> back = LoadCheckpoint(path);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->margin_a, c.margin_a);
  EXPECT_EQ(back->vocab.size(), c.vocab.size());
  EXPECT_EQ(back->vocab.Word(3), "sees");
  EXPECT_EQ(back->params.config.variant, c.params.config.variant);
  auto x = back->params.Blocks();
  auto y = c.params.Blocks();
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i]->name, y[i]->name);
    EXPECT_EQ(x[i]->values, y[i]->values);
  }
}

TEST(CheckpointTest, UnreadableFails) {
  EXPECT_FALSE(LoadCheckpoint("/nonexistent/ckpt").ok());
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "bad.ckpt").string();
  FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("not a checkpoint\n", f);
  std::fclose(f);
  EXPECT_FALSE(LoadCheckpoint(path).ok());
}

TEST(VariantTest, Names) {
  EXPECT_EQ(*ParseVariant(VariantName(TextEncoderVariant::kBagOfTokens)),
            TextEncoderVariant::kBagOfTokens);
  EXPECT_EQ(*ParseVariant(VariantName(TextEncoderVariant::kPositionAware)),
            TextEncoderVariant::kPositionAware);
  EXPECT_FALSE(ParseVariant("transformer").ok());
}

}  // namespace
}  // namespace ahnpl
