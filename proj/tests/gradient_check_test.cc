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

#include "ahnpl/gradient_check.h"

#include <string>

#include "gtest/gtest.h"

namespace ahnpl {
namespace {

double GroupMax(const GradCheckReport& r, const std::string& group) {
  for (const GroupGradient& g : r.groups) {
    if (g.group == group) return g.max_abs_gradient;
  }
  ADD_FAILURE() << "missing group " << group;
  return -1.0;
}

class FreshParamsTest
    : public ::testing::TestWithParam<std::tuple<TextEncoderVariant, int>> {};

TEST_P(FreshParamsTest, EveryTermPasses) {
  const auto [variant, seed] = GetParam();
  GradCheckFixture f = MakeGradCheckFixture(variant, 4, 2, 8, seed);
  for (LossTerm term : AllLossTerms()) {
    absl::StatusOr<GradCheckReport> r = FiniteDifferenceCheck(
        term, f.params, f.state, f.samples, GradCheckOptions());
    ASSERT_TRUE(r.ok()) << r.status();
    EXPECT_TRUE(r->passed) << r->term << " max rel " << r->max_rel_error
                           << " at " << r->worst_coordinate;
    EXPECT_EQ(r->checked + r->kinks, f.params.NumValues() + 1);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, FreshParamsTest,
    ::testing::Combine(::testing::Values(TextEncoderVariant::kBagOfTokens,
                                         TextEncoderVariant::kPositionAware),
                       ::testing::Values(1, 2, 3)));

TEST(GradCheckTest, IndependentGroupsHaveExactlyZeroGradient) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kPositionAware, 4, 2, 8, 1);
  // Textual negatives never see the image encoder or a.
  GradCheckReport txt = *FiniteDifferenceCheck(
      LossTerm::kTextualNegative, f.params, f.state, f.samples, {});
  EXPECT_EQ(GroupMax(txt, "image_projection"), 0.0);
  EXPECT_EQ(GroupMax(txt, "image_bias"), 0.0);
  EXPECT_EQ(GroupMax(txt, "margin_a"), 0.0);
  EXPECT_TRUE(txt.passed);
  // Only the positive margin depends on a.
  GradCheckReport cont = *FiniteDifferenceCheck(
      LossTerm::kContrastive, f.params, f.state, f.samples, {});
  EXPECT_EQ(GroupMax(cont, "margin_a"), 0.0);
  GradCheckReport pos = *FiniteDifferenceCheck(
      LossTerm::kPositiveMargin, f.params, f.state, f.samples, {});
  EXPECT_GT(GroupMax(pos, "margin_a"), 0.0);
}

TEST(GradCheckTest, BagVariantIgnoresPositions) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kBagOfTokens, 4, 2, 8, 2);
  GradCheckReport r = *FiniteDifferenceCheck(LossTerm::kTotal, f.params,
                                             f.state, f.samples, {});
  EXPECT_EQ(GroupMax(r, "position_embedding"), 0.0);
  EXPECT_TRUE(r.passed);
}

TEST(GradCheckTest, CorruptedGradientFails) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kPositionAware, 4, 2, 8, 1);
  GradCheckOptions options;
  options.corruption = 1e-3;
  for (LossTerm term : AllLossTerms()) {
    GradCheckReport r =
        *FiniteDifferenceCheck(term, f.params, f.state, f.samples, options);
    EXPECT_FALSE(r.passed) << r.term;
    EXPECT_GT(r.max_rel_error, 1e-6);
  }
}

TEST(GradCheckTest, EpsilonRange) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kPositionAware, 2, 1, 4, 1);
  GradCheckOptions options;
  options.epsilon = 1e-2;
  EXPECT_FALSE(FiniteDifferenceCheck(LossTerm::kTotal, f.params, f.state,
                                     f.samples, options)
                   .ok());
  options.epsilon = 1e-8;
  EXPECT_FALSE(FiniteDifferenceCheck(LossTerm::kTotal, f.params, f.state,
                                     f.samples, options)
                   .ok());
}

TEST(GradCheckTest, SubsetAboveThresholdIsSeededAndIncludesA) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kPositionAware, 4, 2, 8, 1);
  GradCheckOptions options;
  options.max_coordinates = 50;
  GradCheckReport a = *FiniteDifferenceCheck(LossTerm::kPositiveMargin,
                                             f.params, f.state, f.samples,
                                             options);
  GradCheckReport b = *FiniteDifferenceCheck(LossTerm::kPositiveMargin,
                                             f.params, f.state, f.samples,
                                             options);
  EXPECT_EQ(a.checked + a.kinks, 50u);
  EXPECT_EQ(a.max_rel_error, b.max_rel_error);
  EXPECT_EQ(a.worst_coordinate, b.worst_coordinate);
  // The canary lands on the first compared coordinate; with one subset
  // coordinate left, that is a.
  options.max_coordinates = 1;
  options.corruption = 1e-3;
  GradCheckReport only_a = *FiniteDifferenceCheck(
      LossTerm::kPositiveMargin, f.params, f.state, f.samples, options);
  EXPECT_EQ(only_a.checked, 1u);
  EXPECT_EQ(only_a.worst_coordinate, "margin_a");
  EXPECT_FALSE(only_a.passed);
}

TEST(GradCheckTest, HingeAtKinkIsExcluded) {
  GradCheckFixture f =
      MakeGradCheckFixture(TextEncoderVariant::kBagOfTokens, 1, 1, 4, 4);
  absl::StatusOr<ModelLoss> base = EvaluateModelLoss(
      f.params, f.state, f.samples, LossTerm::kPositiveMargin, LossSwitches(),
      kDefaultTemperature, false);
  ASSERT_TRUE(base.ok());
  // Put a exactly on the hinge: a = S(I, T).
  const double s = CosineUnchecked(base->batch.images[0].values(),
                                   base->batch.texts[0].values());
  f.state.a = s;
  GradCheckReport r = *FiniteDifferenceCheck(
      LossTerm::kPositiveMargin, f.params, f.state, f.samples, {});
  EXPECT_GT(r.kinks, 0u);
  EXPECT_TRUE(r.passed);
}

}  // namespace
}  // namespace ahnpl
