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

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ahnpl/random.h"

namespace ahnpl {
namespace {

// Rounding error allowed per loss evaluation, in units of the loss.
constexpr double kRoundoffUlps = 16.0;

// Block index into EncoderParams::Blocks(), or -1 for a.
struct Coordinate {
  int block = -1;
  std::size_t index = 0;

  friend bool operator<(const Coordinate& x, const Coordinate& y) {
    return std::pair(x.block, x.index) < std::pair(y.block, y.index);
  }
};

// A hinge is a kink for a coordinate when it switches side across the
// stencil, or when it depends on the coordinate and comes within
// 10 * epsilon of zero.
bool IsKink(const ModelLoss& base, const std::vector<ModelLoss>& probes,
            double epsilon) {
  for (const ModelLoss& p : probes) {
    if (p.hinge_active != base.hinge_active) return true;
  }
  const double band = 10.0 * epsilon;
  for (std::size_t h = 0; h < base.hinge_margins.size(); ++h) {
    bool moves = false;
    double closest = std::abs(base.hinge_margins[h]);
    for (const ModelLoss& p : probes) {
      moves |= p.hinge_margins[h] != base.hinge_margins[h];
      closest = std::min(closest, std::abs(p.hinge_margins[h]));
    }
    if (moves && closest < band) return true;
  }
  return false;
}

}  // namespace

absl::StatusOr<GradCheckReport> FiniteDifferenceCheck(
    LossTerm term, const EncoderParams& params, const MarginState& state,
    std::span<const TrainingSample> samples, const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-7 && options.epsilon <= 1e-3)) {
    return absl::InvalidArgumentError("epsilon must be in [1e-7, 1e-3]");
  }
  auto evaluate = [&](const EncoderParams& p, const MarginState& s) {
    return EvaluateModelLoss(p, s, samples, term, options.switches,
                             options.temperature, options.detach_visual_text);
  };
  absl::StatusOr<ModelLoss> base = evaluate(params, state);
  if (!base.ok()) return base.status();

  GradCheckReport report;
  report.term = LossTermName(term);
  const std::vector<const ParamBlock*> grad_blocks =
      std::as_const(base->grads).Blocks();
  for (const ParamBlock* b : grad_blocks) {
    GroupGradient g{b->name, b->values.size(), 0.0};
    for (double v : b->values) {
      g.max_abs_gradient = std::max(g.max_abs_gradient, std::abs(v));
    }
    report.groups.push_back(g);
  }
  report.groups.push_back({"margin_a", 1, std::abs(base->grad_a)});

  std::vector<Coordinate> coords;
  for (int b = 0; b < static_cast<int>(grad_blocks.size()); ++b) {
    for (std::size_t i = 0; i < grad_blocks[b]->values.size(); ++i) {
      coords.push_back({b, i});
    }
  }
  if (coords.size() + 1 > options.max_coordinates) {
    Rng rng = MakeStream(options.seed, "gradcheck");
    Shuffle(coords, rng);
    coords.resize(options.max_coordinates > 0 ? options.max_coordinates - 1
                                              : 0);
    std::sort(coords.begin(), coords.end());
  }
  coords.push_back({-1, 0});

  EncoderParams work = params;
  MarginState work_state = state;
  std::vector<ParamBlock*> blocks = work.Blocks();
  bool corrupted = options.corruption == 0.0;
  const double eps = options.epsilon;
  for (const Coordinate& c : coords) {
    double& x = c.block < 0 ? work_state.a : blocks[c.block]->values[c.index];
    const double original = x;
    std::vector<ModelLoss> probes;
    for (double step : {2.0, 1.0, -1.0, -2.0}) {
      x = original + step * eps;
      absl::StatusOr<ModelLoss> probe = evaluate(work, work_state);
      if (!probe.ok()) {
        x = original;
        return probe.status();
      }
      probes.push_back(*std::move(probe));
    }
    x = original;

    if (IsKink(*base, probes, eps)) {
      ++report.kinks;
      continue;
    }
    double analytic = c.block < 0 ? base->grad_a
                                  : grad_blocks[c.block]->values[c.index];
    if (!corrupted) {
      analytic += options.corruption;
      corrupted = true;
    }
    const double numeric = (8.0 * (probes[1].value - probes[2].value) -
                            (probes[0].value - probes[3].value)) /
                           (12.0 * eps);
    const double noise =
        kRoundoffUlps * std::numeric_limits<double>::epsilon() *
        (8.0 * (std::abs(probes[1].value) + std::abs(probes[2].value)) +
         std::abs(probes[0].value) + std::abs(probes[3].value)) /
        (12.0 * eps);
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), options.floor,
                  noise / options.tolerance});
    const double rel = std::abs(analytic - numeric) / denom;
    ++report.checked;
    if (rel > report.max_rel_error || !std::isfinite(rel)) {
      report.max_rel_error = rel;
      report.worst_coordinate =
          c.block < 0 ? "margin_a"
                      : absl::StrCat(blocks[c.block]->name, "[", c.index, "]");
    }
  }
  report.passed = report.checked > 0 &&
                  std::isfinite(report.max_rel_error) &&
                  report.max_rel_error < options.tolerance;
  return report;
}

GradCheckFixture MakeGradCheckFixture(TextEncoderVariant variant, int n,
                                      int k, int embed_dim,
                                      std::uint64_t seed) {
  EncoderConfig config;
  config.variant = variant;
  config.vocab_size = 12;
  config.hidden_dim = 6;
  config.embed_dim = embed_dim;
  config.feature_dim = 10;
  config.max_length = 6;

  Rng rng = MakeStream(seed, "gradcheck-fixture");
  GradCheckFixture f;
  f.params = *InitParams(config, rng);
  // Nonzero biases so their gradients are exercised away from zero.
  for (double& v : f.params.text_bias.values) v = 0.1 * StandardNormal(rng);
  for (double& v : f.params.image_bias.values) v = 0.1 * StandardNormal(rng);

  auto random_caption = [&]() {
    const std::size_t len = 2 + UniformIndex(rng, config.max_length - 1);
    std::vector<int> ids(len);
    for (int& id : ids) {
      id = 1 + static_cast<int>(UniformIndex(rng, config.vocab_size - 1));
    }
    return ids;
  };
  for (int i = 0; i < n; ++i) {
    TrainingSample s;
    s.id = absl::StrCat("fixture-", i);
    s.token_ids = random_caption();
    s.features.resize(config.feature_dim);
    for (double& v : s.features) v = StandardNormal(rng);
    for (int j = 0; j < k; ++j) s.negatives.push_back(random_caption());
    f.samples.push_back(std::move(s));
  }
  f.state = MarginState::Initial(0.0, k);
  f.state.a = kMarginLowerBound + 0.6 * UniformReal(rng);
  for (double& m : f.state.thresholds) m = 0.5 * UniformReal(rng) - 0.2;
  return f;
}

}  // namespace ahnpl
