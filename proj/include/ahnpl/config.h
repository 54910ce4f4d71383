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

#ifndef AHNPL_CONFIG_H_
#define AHNPL_CONFIG_H_

#include <cstdint>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/encoders.h"
#include "ahnpl/losses.h"
#include "ahnpl/synthetic_data.h"
#include "json.hpp"

namespace ahnpl {

struct OptimizerConfig {
  std::string name = "adamw";
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct DataConfig {
  SceneVocabSizes sizes;
  int train_pairs = 2000;
  int benchmark_items = 600;
  double noise_sigma = 0.05;
};

// Everything a run depends on. Serialized as JSON; see README for the
// schema. Unknown keys are rejected.
struct TrainConfig {
  std::string preset = "desk";
  std::uint64_t seed = 1;
  int batch_size = 64;
  int epochs = 10;
  double learning_rate = 5e-3;
  double weight_decay = 1e-4;
  double temperature = kDefaultTemperature;
  int k_per_kind = 2;
  // Fixed number of negative slots per sample; short sets are padded by
  // resampling their own negatives.
  int negatives_per_sample = 4;
  LossSwitches switches;
  // Stop visual-negative gradients from reaching the text encoder.
  bool detach_visual_text = false;
  OptimizerConfig optimizer;
  TextEncoderVariant variant = TextEncoderVariant::kPositionAware;
  int hidden_dim = 64;
  int embed_dim = 32;
  int max_length = 16;
  DataConfig data;

  absl::Status Validate() const;
  nlohmann::ordered_json ToJson() const;
  static absl::StatusOr<TrainConfig> FromJson(const nlohmann::json& j);
};

// Desk-scale defaults: seconds to train on one core.
TrainConfig DeskPreset();
// The published fine-tuning hyperparameters: batch 128, learning rate
// 2e-5, weight decay 0.1, 10 epochs. Everything else matches the desk
// preset.
TrainConfig PaperMscocoPreset();
absl::StatusOr<TrainConfig> PresetByName(const std::string& name);

absl::StatusOr<TrainConfig> LoadConfigFile(const std::string& path);

}  // namespace ahnpl

#endif  // AHNPL_CONFIG_H_
