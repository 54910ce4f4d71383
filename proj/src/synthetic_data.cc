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

#include "ahnpl/synthetic_data.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "ahnpl/embedding.h"

namespace ahnpl {
namespace {

constexpr int kCaptionLength = 7;
// Token positions inside the rendered template.
constexpr int kSubjectAttPos = 1;
constexpr int kSubjectObjPos = 2;
constexpr int kRelationPos = 3;
constexpr int kObjectAttPos = 5;
constexpr int kObjectObjPos = 6;

int IndexOf(const std::vector<std::string>& words, int limit,
            const std::string& word) {
  for (int i = 0; i < limit; ++i) {
    if (words[i] == word) return i;
  }
  return -1;
}

// Uniform draw from [0, n) excluding `skip`.
int DrawOther(Rng& rng, int n, int skip) {
  int v = static_cast<int>(UniformIndex(rng, n - 1));
  return v >= skip ? v + 1 : v;
}

Scene DrawPoolScene(Rng& rng, const SceneVocabSizes& sizes, bool benchmark) {
  for (;;) {
    Scene s = GenerateScene(rng, sizes);
    if (IsBenchmarkScene(s) == benchmark) return s;
  }
}

absl::Status WriteFeatures(const std::string& path,
                           std::vector<EmbeddingRecord> records) {
  if (records.empty()) return absl::InvalidArgumentError("no feature records");
  const std::size_t dim = records.front().vector.dim();
  return WriteEmbeddingFile(path, dim, records);
}

}  // namespace

absl::Status SceneVocabSizes::Validate() const {
  if (objects < 2 || objects > static_cast<int>(ObjectWords().size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "objects must be in [2, ", ObjectWords().size(), "]"));
  }
  if (attributes < 2 ||
      attributes > static_cast<int>(AttributeWords().size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "attributes must be in [2, ", AttributeWords().size(), "]"));
  }
  if (relations < 2 || relations > static_cast<int>(RelationWords().size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "relations must be in [2, ", RelationWords().size(), "]"));
  }
  return absl::OkStatus();
}

const std::vector<std::string>& ObjectWords() {
  static const auto* const kWords = new std::vector<std::string>{
      "cube", "ball", "cone", "ring", "box", "disk",
      "star", "cup",  "vase", "lamp", "book", "chair"};
  return *kWords;
}

const std::vector<std::string>& AttributeWords() {
  static const auto* const kWords = new std::vector<std::string>{
      "red", "blue", "green", "yellow", "small", "large", "shiny", "wooden"};
  return *kWords;
}

const std::vector<std::string>& RelationWords() {
  static const auto* const kWords = new std::vector<std::string>{
      "holds", "pushes", "follows", "covers", "faces", "lifts"};
  return *kWords;
}

std::string Scene::Key() const {
  return absl::StrCat(subject.object, ",", subject.attribute, ",", relation,
                      ",", object.object, ",", object.attribute);
}

Scene GenerateScene(Rng& rng, const SceneVocabSizes& sizes) {
  Scene s;
  s.subject.object = static_cast<int>(UniformIndex(rng, sizes.objects));
  s.subject.attribute = static_cast<int>(UniformIndex(rng, sizes.attributes));
  s.relation = static_cast<int>(UniformIndex(rng, sizes.relations));
  s.object.object = DrawOther(rng, sizes.objects, s.subject.object);
  s.object.attribute = static_cast<int>(UniformIndex(rng, sizes.attributes));
  return s;
}

bool IsBenchmarkScene(const Scene& scene) {
  return SplitMix64(StableHash(scene.Key())) % 5 == 0;
}

Caption RenderCaption(const Scene& scene) {
  Caption c;
  c.tokens = {"a",
              AttributeWords()[scene.subject.attribute],
              ObjectWords()[scene.subject.object],
              RelationWords()[scene.relation],
              "a",
              AttributeWords()[scene.object.attribute],
              ObjectWords()[scene.object.object]};
  c.tags = {PosTag::kDet, PosTag::kAdj,  PosTag::kNoun, PosTag::kVerb,
            PosTag::kDet, PosTag::kAdj, PosTag::kNoun};
  return c;
}

absl::StatusOr<Scene> ParseSceneCaption(const std::vector<std::string>& tokens,
                                        const SceneVocabSizes& sizes) {
  if (tokens.size() != kCaptionLength || tokens[0] != "a" ||
      tokens[4] != "a") {
    return absl::InvalidArgumentError(absl::StrCat(
        "not a scene caption: '", absl::StrJoin(tokens, " "), "'"));
  }
  Scene s;
  s.subject.attribute =
      IndexOf(AttributeWords(), sizes.attributes, tokens[kSubjectAttPos]);
  s.subject.object =
      IndexOf(ObjectWords(), sizes.objects, tokens[kSubjectObjPos]);
  s.relation = IndexOf(RelationWords(), sizes.relations, tokens[kRelationPos]);
  s.object.attribute =
      IndexOf(AttributeWords(), sizes.attributes, tokens[kObjectAttPos]);
  s.object.object =
      IndexOf(ObjectWords(), sizes.objects, tokens[kObjectObjPos]);
  if (s.subject.attribute < 0 || s.subject.object < 0 || s.relation < 0 ||
      s.object.attribute < 0 || s.object.object < 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown word in scene caption '", absl::StrJoin(tokens, " "), "'"));
  }
  return s;
}

std::vector<double> RenderImageFeatures(const Scene& scene,
                                        const SceneVocabSizes& sizes,
                                        double noise_sigma, Rng& rng) {
  std::vector<double> f(sizes.FeatureDim(), 0.0);
  int offset = 0;
  f[offset + scene.subject.object] = 1.0;
  offset += sizes.objects;
  f[offset + scene.subject.attribute] = 1.0;
  offset += sizes.attributes;
  f[offset + scene.relation] = 1.0;
  offset += sizes.relations;
  f[offset + scene.object.object] = 1.0;
  offset += sizes.objects;
  f[offset + scene.object.attribute] = 1.0;
  if (noise_sigma > 0.0) {
    for (double& v : f) v += noise_sigma * StandardNormal(rng);
  }
  return f;
}

PosLexicon SceneLexicon(const SceneVocabSizes& sizes) {
  PosLexicon lexicon;
  // Add cannot fail: the word lists are disjoint.
  (void)lexicon.Add("a", PosTag::kDet);
  for (int i = 0; i < sizes.objects; ++i) {
    (void)lexicon.Add(ObjectWords()[i], PosTag::kNoun);
  }
  for (int i = 0; i < sizes.attributes; ++i) {
    (void)lexicon.Add(AttributeWords()[i], PosTag::kAdj);
  }
  for (int i = 0; i < sizes.relations; ++i) {
    (void)lexicon.Add(RelationWords()[i], PosTag::kVerb);
  }
  return lexicon;
}

const std::vector<ChoiceCategory>& AllCategories() {
  static const auto* const kAll = new std::vector<ChoiceCategory>{
      ChoiceCategory::kSwapObj,    ChoiceCategory::kSwapAtt,
      ChoiceCategory::kReplaceRel, ChoiceCategory::kReplaceAtt,
      ChoiceCategory::kReplaceObj, ChoiceCategory::kAddAtt};
  return *kAll;
}

std::string CategoryName(ChoiceCategory category) {
  switch (category) {
    case ChoiceCategory::kSwapObj:
      return "SWAP_OBJ";
    case ChoiceCategory::kSwapAtt:
      return "SWAP_ATT";
    case ChoiceCategory::kReplaceRel:
      return "REPLACE_REL";
    case ChoiceCategory::kReplaceAtt:
      return "REPLACE_ATT";
    case ChoiceCategory::kReplaceObj:
      return "REPLACE_OBJ";
    case ChoiceCategory::kAddAtt:
      return "ADD_ATT";
  }
  return "";
}

absl::StatusOr<ChoiceCategory> ParseCategory(const std::string& name) {
  for (ChoiceCategory c : AllCategories()) {
    if (CategoryName(c) == name) return c;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown category '", name, "'"));
}

absl::StatusOr<Caption> EditCaption(const Scene& scene,
                                    ChoiceCategory category,
                                    const SceneVocabSizes& sizes, Rng& rng) {
  Caption c = RenderCaption(scene);
  const bool subject_side = UniformIndex(rng, 2) == 0;
  switch (category) {
    case ChoiceCategory::kSwapObj:
      std::swap(c.tokens[kSubjectObjPos], c.tokens[kObjectObjPos]);
      break;
    case ChoiceCategory::kSwapAtt:
      if (scene.subject.attribute == scene.object.attribute) {
        return absl::FailedPreconditionError(
            "attribute swap needs two different attributes");
      }
      std::swap(c.tokens[kSubjectAttPos], c.tokens[kObjectAttPos]);
      break;
    case ChoiceCategory::kReplaceRel:
      c.tokens[kRelationPos] =
          RelationWords()[DrawOther(rng, sizes.relations, scene.relation)];
      break;
    case ChoiceCategory::kReplaceAtt: {
      const Entity& e = subject_side ? scene.subject : scene.object;
      c.tokens[subject_side ? kSubjectAttPos : kObjectAttPos] =
          AttributeWords()[DrawOther(rng, sizes.attributes, e.attribute)];
      break;
    }
    case ChoiceCategory::kReplaceObj: {
      const Entity& e = subject_side ? scene.subject : scene.object;
      c.tokens[subject_side ? kSubjectObjPos : kObjectObjPos] =
          ObjectWords()[DrawOther(rng, sizes.objects, e.object)];
      break;
    }
    case ChoiceCategory::kAddAtt: {
      const Entity& e = subject_side ? scene.subject : scene.object;
      const int noun_pos = subject_side ? kSubjectObjPos : kObjectObjPos;
      const std::string extra =
          AttributeWords()[DrawOther(rng, sizes.attributes, e.attribute)];
      c.tokens.insert(c.tokens.begin() + noun_pos, extra);
      c.tags.insert(c.tags.begin() + noun_pos, PosTag::kAdj);
      break;
    }
  }
  return c;
}

std::vector<TrainPair> GenerateTrainPairs(int count,
                                          const SceneVocabSizes& sizes,
                                          double noise_sigma, Rng& rng) {
  std::vector<TrainPair> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) {
    TrainPair p;
    p.id = absl::StrFormat("train-%05d", i);
    p.scene = DrawPoolScene(rng, sizes, /*benchmark=*/false);
    p.caption = RenderCaption(p.scene);
    p.caption.id = p.id;
    p.image_features = RenderImageFeatures(p.scene, sizes, noise_sigma, rng);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

absl::StatusOr<std::vector<ChoiceItem>> BuildBenchmark(
    int count, const std::vector<ChoiceCategory>& categories,
    const SceneVocabSizes& sizes, double noise_sigma, Rng& rng) {
  if (categories.empty()) return absl::InvalidArgumentError("no categories");
  if (absl::Status s = sizes.Validate(); !s.ok()) return s;
  std::vector<ChoiceItem> items;
  items.reserve(count);
  for (int i = 0; i < count; ++i) {
    const ChoiceCategory category = categories[i % categories.size()];
    Scene scene = DrawPoolScene(rng, sizes, /*benchmark=*/true);
    while (category == ChoiceCategory::kSwapAtt &&
           scene.subject.attribute == scene.object.attribute) {
      scene = DrawPoolScene(rng, sizes, /*benchmark=*/true);
    }
    absl::StatusOr<Caption> negative =
        EditCaption(scene, category, sizes, rng);
    if (!negative.ok()) return negative.status();
    ChoiceItem item;
    item.id = absl::StrFormat("item-%05d", i);
    item.category = category;
    item.positive = RenderCaption(scene);
    item.positive.id = item.id;
    item.negative = *std::move(negative);
    item.negative.id = item.id;
    item.image_features = RenderImageFeatures(scene, sizes, noise_sigma, rng);
    items.push_back(std::move(item));
  }
  return items;
}

std::string FeaturePathFor(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + ".emb";
  }
  return path.substr(0, dot) + ".emb";
}

absl::Status WriteTrainPairs(const std::string& path,
                             const std::vector<TrainPair>& pairs) {
  std::vector<CorpusLine> lines;
  std::vector<EmbeddingRecord> features;
  for (const TrainPair& p : pairs) {
    lines.push_back({p.id, p.caption.tokens});
    features.push_back({p.id, EmbeddingVector(p.image_features)});
  }
  if (absl::Status s = WriteCorpus(path, lines); !s.ok()) return s;
  return WriteFeatures(FeaturePathFor(path), std::move(features));
}

absl::Status WriteBenchmark(const std::string& path,
                            const std::vector<ChoiceItem>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  std::vector<EmbeddingRecord> features;
  for (const ChoiceItem& item : items) {
    out << item.id << '\t' << CategoryName(item.category) << '\t'
        << item.positive.Text() << '\t' << item.negative.Text() << '\n';
    features.push_back({item.id, EmbeddingVector(item.image_features)});
  }
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  out.close();
  return WriteFeatures(FeaturePathFor(path), std::move(features));
}

absl::StatusOr<std::vector<ChoiceItem>> ReadBenchmark(
    const std::string& path, const PosLexicon* lexicon) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  absl::StatusOr<std::vector<EmbeddingRecord>> features =
      ReadEmbeddingFile(FeaturePathFor(path));
  if (!features.ok()) return features.status();
  std::map<std::string, const EmbeddingRecord*> by_id;
  for (const EmbeddingRecord& r : *features) by_id[r.id] = &r;

  auto make_caption = [&](const std::string& id,
                          absl::string_view text) -> absl::StatusOr<Caption> {
    std::vector<std::string> tokens =
        absl::StrSplit(text, ' ', absl::SkipEmpty());
    if (tokens.empty()) return absl::InvalidArgumentError("empty caption");
    Caption c;
    if (lexicon != nullptr) {
      absl::StatusOr<Caption> tagged = TagTokens(tokens, *lexicon);
      if (!tagged.ok()) return tagged.status();
      c = *std::move(tagged);
    } else {
      c.tokens = std::move(tokens);
      c.tags.assign(c.tokens.size(), PosTag::kOther);
    }
    c.id = id;
    return c;
  };

  std::vector<ChoiceItem> items;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, '\t');
    if (fields.size() != 4) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no,
          ": expected item_id<TAB>category<TAB>positive<TAB>negative"));
    }
    ChoiceItem item;
    item.id = fields[0];
    absl::StatusOr<ChoiceCategory> category = ParseCategory(fields[1]);
    if (!category.ok()) return category.status();
    item.category = *category;
    absl::StatusOr<Caption> positive = make_caption(item.id, fields[2]);
    absl::StatusOr<Caption> negative = make_caption(item.id, fields[3]);
    if (!positive.ok() || !negative.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": bad caption"));
    }
    item.positive = *std::move(positive);
    item.negative = *std::move(negative);
    auto it = by_id.find(item.id);
    if (it == by_id.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": no features for item ", item.id));
    }
    item.image_features = it->second->vector.vector();
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace ahnpl
