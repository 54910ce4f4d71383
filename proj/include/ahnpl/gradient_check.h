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

// Central finite-difference verification of the analytic gradients of every
// loss term with respect to encoder parameters and the margin parameter a.
// The numeric derivative uses the fourth-order central stencil
//   (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / 12h.

#ifndef AHNPL_GRADIENT_CHECK_H_
#define AHNPL_GRADIENT_CHECK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ahnpl/encoders.h"
#include "ahnpl/losses.h"
#include "ahnpl/trainer.h"

namespace ahnpl {

struct GradCheckOptions {
  double epsilon = 1e-4;
  double tolerance = 1e-6;
  // Minimum denominator of the relative error, so coordinates whose true
  // gradient is (numerically) zero are compared absolutely. The floor is
  // raised per coordinate to roundoff_noise / tolerance, where
  // roundoff_noise bounds the rounding error of the stencil.
  double floor = 1e-6;
  // Above this many coordinates a seeded random subset is checked.
  std::size_t max_coordinates = 5000;
  std::uint64_t seed = 1;
  LossSwitches switches;
  double temperature = kDefaultTemperature;
  bool detach_visual_text = false;
  // Adds this amount to one analytic coordinate before comparing.
  double corruption = 0.0;
};

// Parameter groups: "text" (token, position, text projection and bias),
// "image" (image projection and bias) and "a".
struct GroupGradient {
  std::string group;
  std::size_t coordinates = 0;
  double max_abs_gradient = 0.0;  // Analytic.
};

struct GradCheckReport {
  std::string term;
  std::size_t checked = 0;
  // Coordinates where a hinge argument dependent on the coordinate lies
  // within 10 * epsilon of zero; not compared.
  std::size_t kinks = 0;
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  bool passed = false;
  std::vector<GroupGradient> groups;
};

absl::StatusOr<GradCheckReport> FiniteDifferenceCheck(
    LossTerm term, const EncoderParams& params, const MarginState& state,
    std::span<const TrainingSample> samples, const GradCheckOptions& options);

// Seeded desk fixture: N samples with K negatives each, embedding dim D,
// random thresholds and a above the lower bound.
struct GradCheckFixture {
  EncoderParams params;
  MarginState state;
  std::vector<TrainingSample> samples;
};

GradCheckFixture MakeGradCheckFixture(TextEncoderVariant variant, int n,
                                      int k, int embed_dim,
                                      std::uint64_t seed);

}  // namespace ahnpl

#endif  // AHNPL_GRADIENT_CHECK_H_
