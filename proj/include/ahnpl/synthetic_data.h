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

// Desk-scale compositional scenes: "a <att> <obj> <rel> a <att> <obj>".
// Image features are role-specific one-hot blocks plus Gaussian noise, so a
// scene and its attribute- or object-swapped twin have different features.
// Benchmark items pair a scene with its true caption and one edited,
// incorrect caption.

#ifndef AHNPL_SYNTHETIC_DATA_H_
#define AHNPL_SYNTHETIC_DATA_H_

#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/negative_textgen.h"
#include "ahnpl/random.h"

namespace ahnpl {

struct SceneVocabSizes {
  int objects = 8;
  int attributes = 6;
  int relations = 4;

  absl::Status Validate() const;
  // Length of a feature vector: two object blocks, two attribute blocks and
  // one relation block.
  int FeatureDim() const { return 2 * objects + 2 * attributes + relations; }
};

const std::vector<std::string>& ObjectWords();
const std::vector<std::string>& AttributeWords();
const std::vector<std::string>& RelationWords();

struct Entity {
  int object = 0;
  int attribute = 0;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Scene {
  Entity subject;
  int relation = 0;
  Entity object;

  std::string Key() const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

// Uniform scene with subject.object != object.object.
Scene GenerateScene(Rng& rng, const SceneVocabSizes& sizes);

// Scenes whose key hashes into bucket 0 of 5 form the benchmark pool; the
// rest are training scenes. The pools are disjoint.
bool IsBenchmarkScene(const Scene& scene);

// "a {att1} {obj1} {rel} a {att2} {obj2}", tagged
// DET ADJ NOUN VERB DET ADJ NOUN.
Caption RenderCaption(const Scene& scene);

// Inverse of RenderCaption. Fails on text outside the template grammar.
absl::StatusOr<Scene> ParseSceneCaption(const std::vector<std::string>& tokens,
                                        const SceneVocabSizes& sizes);

std::vector<double> RenderImageFeatures(const Scene& scene,
                                        const SceneVocabSizes& sizes,
                                        double noise_sigma, Rng& rng);

// Every template word with its tag.
PosLexicon SceneLexicon(const SceneVocabSizes& sizes);

enum class ChoiceCategory {
  kSwapObj,
  kSwapAtt,
  kReplaceRel,
  kReplaceAtt,
  kReplaceObj,
  kAddAtt,
};

const std::vector<ChoiceCategory>& AllCategories();
std::string CategoryName(ChoiceCategory category);
absl::StatusOr<ChoiceCategory> ParseCategory(const std::string& name);

struct ChoiceItem {
  std::string id;
  ChoiceCategory category;
  std::vector<double> image_features;
  Caption positive;
  Caption negative;
};

// Applies the category's edit to the scene's caption. kSwapAtt needs two
// different attributes; other categories always apply.
absl::StatusOr<Caption> EditCaption(const Scene& scene,
                                    ChoiceCategory category,
                                    const SceneVocabSizes& sizes, Rng& rng);

struct TrainPair {
  std::string id;
  Scene scene;
  Caption caption;
  std::vector<double> image_features;
};

std::vector<TrainPair> GenerateTrainPairs(int count,
                                          const SceneVocabSizes& sizes,
                                          double noise_sigma, Rng& rng);

// Categories are assigned round robin, so counts differ by at most one.
absl::StatusOr<std::vector<ChoiceItem>> BuildBenchmark(
    int count, const std::vector<ChoiceCategory>& categories,
    const SceneVocabSizes& sizes, double noise_sigma, Rng& rng);

// Sibling feature file of a caption/benchmark file: the same path with the
// extension replaced by ".emb".
std::string FeaturePathFor(const std::string& path);

// Corpus "id<TAB>tokens" plus sibling features.
absl::Status WriteTrainPairs(const std::string& path,
                             const std::vector<TrainPair>& pairs);

// Benchmark "item_id<TAB>category<TAB>positive tokens<TAB>negative tokens"
// plus sibling features.
absl::Status WriteBenchmark(const std::string& path,
                            const std::vector<ChoiceItem>& items);
// Tags captions with `lexicon` when given, else every tag is kOther.
absl::StatusOr<std::vector<ChoiceItem>> ReadBenchmark(
    const std::string& path, const PosLexicon* lexicon);

}  // namespace ahnpl

#endif  // AHNPL_SYNTHETIC_DATA_H_
