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

#include "ahnpl/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "absl/strings/str_cat.h"

namespace ahnpl {
namespace {

using nlohmann::json;

absl::Status CheckKeys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where.empty() ? "config" : where, " must be an object"));
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown config key '", where, key, "'"));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void ReadIf(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

absl::Status TrainConfig::Validate() const {
  auto bad = [](absl::string_view why) {
    return absl::InvalidArgumentError(why);
  };
  if (batch_size < 1) return bad("batch_size must be >= 1");
  if (epochs < 1) return bad("epochs must be >= 1");
  if (!(learning_rate > 0.0)) return bad("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) return bad("weight_decay must be >= 0");
  if (!(temperature > 0.0)) return bad("temperature must be > 0");
  if (k_per_kind < 1) return bad("k_per_kind must be >= 1");
  if (negatives_per_sample < 1) return bad("negatives_per_sample must be >= 1");
  if (optimizer.name != "adamw") {
    return bad(absl::StrCat("unsupported optimizer '", optimizer.name, "'"));
  }
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) ||
      !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0) ||
      !(optimizer.epsilon > 0.0)) {
    return bad("optimizer betas must be in [0, 1) and epsilon > 0");
  }
  if (hidden_dim < 1 || embed_dim < 1 || max_length < 1) {
    return bad("encoder dims must be positive");
  }
  if (absl::Status s = data.sizes.Validate(); !s.ok()) return s;
  if (data.train_pairs < 1 || data.benchmark_items < 1) {
    return bad("train_pairs and benchmark_items must be >= 1");
  }
  if (!(data.noise_sigma >= 0.0) || !std::isfinite(data.noise_sigma)) {
    return bad("noise_sigma must be >= 0");
  }
  return absl::OkStatus();
}

nlohmann::ordered_json TrainConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["preset"] = preset;
  j["seed"] = seed;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["weight_decay"] = weight_decay;
  j["temperature"] = temperature;
  j["k_per_kind"] = k_per_kind;
  j["negatives_per_sample"] = negatives_per_sample;
  j["ablation"] = {{"use_negatives", switches.use_negatives},
                   {"use_mhnl", switches.use_mhnl},
                   {"use_dmcl", switches.use_dmcl}};
  j["detach_visual_text"] = detach_visual_text;
  j["optimizer"] = {{"name", optimizer.name},
                    {"beta1", optimizer.beta1},
                    {"beta2", optimizer.beta2},
                    {"epsilon", optimizer.epsilon}};
  j["encoder"] = {{"variant", VariantName(variant)},
                  {"hidden_dim", hidden_dim},
                  {"embed_dim", embed_dim},
                  {"max_length", max_length}};
  j["data"] = {{"objects", data.sizes.objects},
               {"attributes", data.sizes.attributes},
               {"relations", data.sizes.relations},
               {"train_pairs", data.train_pairs},
               {"benchmark_items", data.benchmark_items},
               {"noise_sigma", data.noise_sigma}};
  return j;
}

absl::StatusOr<TrainConfig> TrainConfig::FromJson(const json& j) {
  if (absl::Status s = CheckKeys(
          j,
          {"preset", "seed", "batch_size", "epochs", "learning_rate",
           "weight_decay", "temperature", "k_per_kind",
           "negatives_per_sample", "ablation", "detach_visual_text",
           "optimizer", "encoder", "data"},
          "");
      !s.ok()) {
    return s;
  }
  TrainConfig c;
  try {
    if (j.contains("preset")) {
      absl::StatusOr<TrainConfig> base =
          PresetByName(j.at("preset").get<std::string>());
      if (!base.ok()) return base.status();
      c = *base;
    }
    ReadIf(j, "seed", c.seed);
    ReadIf(j, "batch_size", c.batch_size);
    ReadIf(j, "epochs", c.epochs);
    ReadIf(j, "learning_rate", c.learning_rate);
    ReadIf(j, "weight_decay", c.weight_decay);
    ReadIf(j, "temperature", c.temperature);
    ReadIf(j, "k_per_kind", c.k_per_kind);
    ReadIf(j, "negatives_per_sample", c.negatives_per_sample);
    ReadIf(j, "detach_visual_text", c.detach_visual_text);
    if (j.contains("ablation")) {
      const json& a = j.at("ablation");
      if (absl::Status s = CheckKeys(
              a, {"use_negatives", "use_mhnl", "use_dmcl"}, "ablation.");
          !s.ok()) {
        return s;
      }
      ReadIf(a, "use_negatives", c.switches.use_negatives);
      ReadIf(a, "use_mhnl", c.switches.use_mhnl);
      ReadIf(a, "use_dmcl", c.switches.use_dmcl);
    }
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      if (absl::Status s =
              CheckKeys(o, {"name", "beta1", "beta2", "epsilon"}, "optimizer.");
          !s.ok()) {
        return s;
      }
      ReadIf(o, "name", c.optimizer.name);
      ReadIf(o, "beta1", c.optimizer.beta1);
      ReadIf(o, "beta2", c.optimizer.beta2);
      ReadIf(o, "epsilon", c.optimizer.epsilon);
    }
    if (j.contains("encoder")) {
      const json& e = j.at("encoder");
      if (absl::Status s = CheckKeys(
              e, {"variant", "hidden_dim", "embed_dim", "max_length"},
              "encoder.");
          !s.ok()) {
        return s;
      }
      if (e.contains("variant")) {
        absl::StatusOr<TextEncoderVariant> v =
            ParseVariant(e.at("variant").get<std::string>());
        if (!v.ok()) return v.status();
        c.variant = *v;
      }
      ReadIf(e, "hidden_dim", c.hidden_dim);
      ReadIf(e, "embed_dim", c.embed_dim);
      ReadIf(e, "max_length", c.max_length);
    }
    if (j.contains("data")) {
      const json& d = j.at("data");
      if (absl::Status s = CheckKeys(
              d,
              {"objects", "attributes", "relations", "train_pairs",
               "benchmark_items", "noise_sigma"},
              "data.");
          !s.ok()) {
        return s;
      }
      ReadIf(d, "objects", c.data.sizes.objects);
      ReadIf(d, "attributes", c.data.sizes.attributes);
      ReadIf(d, "relations", c.data.sizes.relations);
      ReadIf(d, "train_pairs", c.data.train_pairs);
      ReadIf(d, "benchmark_items", c.data.benchmark_items);
      ReadIf(d, "noise_sigma", c.data.noise_sigma);
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  if (absl::Status s = c.Validate(); !s.ok()) return s;
  return c;
}

TrainConfig DeskPreset() { return TrainConfig(); }

TrainConfig PaperMscocoPreset() {
  TrainConfig c;
  c.preset = "paper-mscoco";
  c.batch_size = 128;
  c.learning_rate = 2e-5;
  c.weight_decay = 0.1;
  c.epochs = 10;
  return c;
}

absl::StatusOr<TrainConfig> PresetByName(const std::string& name) {
  if (name == "desk") return DeskPreset();
  if (name == "paper-mscoco") return PaperMscocoPreset();
  return absl::InvalidArgumentError(absl::StrCat("unknown preset '", name,
                                                 "'"));
}

absl::StatusOr<TrainConfig> LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return TrainConfig::FromJson(j);
}

}  // namespace ahnpl
