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

// Caption tagging and textual hard-negative generation. Two negative kinds
// are produced: swapping two distinct nouns, and replacing one
// noun/verb/adjective with a different word of the same part of speech.
//
// Tagging and mask filling sit behind small interfaces so a model-backed
// tagger or filler can replace the lexicon-backed defaults.

#ifndef AHNPL_NEGATIVE_TEXTGEN_H_
#define AHNPL_NEGATIVE_TEXTGEN_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/random.h"

namespace ahnpl {

enum class PosTag { kNoun, kVerb, kAdj, kDet, kAdp, kOther };

std::string PosTagName(PosTag tag);
absl::StatusOr<PosTag> ParsePosTag(const std::string& name);

struct Caption {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<PosTag> tags;

  std::size_t size() const { return tokens.size(); }
  std::string Text() const;
};

absl::Status ValidateCaption(const Caption& caption);

class PosLexicon {
 public:
  // Fails if a word is given two different tags.
  absl::Status Add(const std::string& word, PosTag tag);

  std::optional<PosTag> Lookup(const std::string& word) const;
  const std::set<std::string>& Candidates(PosTag tag) const;
  std::size_t size() const { return tag_of_.size(); }

  // Every word has one tag (enforced by Add) and NOUN, VERB and ADJ each
  // have at least one candidate.
  absl::Status Validate() const;

  // Lines "word<TAB>TAG".
  static absl::StatusOr<PosLexicon> Load(const std::string& path);
  absl::Status Save(const std::string& path) const;

 private:
  std::map<std::string, PosTag> tag_of_;
  std::map<PosTag, std::set<std::string>> by_tag_;
};

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual absl::StatusOr<Caption> Tag(
      const std::vector<std::string>& tokens) const = 0;
};

// Proposes a replacement for the token at `position`. Returns a
// FailedPrecondition status when no different same-tag word exists.
class MaskFiller {
 public:
  virtual ~MaskFiller() = default;
  virtual absl::StatusOr<std::string> Fill(const Caption& caption,
                                           std::size_t position,
                                           Rng& rng) const = 0;
  virtual bool CanFill(const Caption& caption, std::size_t position) const = 0;
};

class LexiconTagger : public Tagger {
 public:
  explicit LexiconTagger(const PosLexicon& lexicon) : lexicon_(lexicon) {}
  absl::StatusOr<Caption> Tag(
      const std::vector<std::string>& tokens) const override;

 private:
  const PosLexicon& lexicon_;
};

// Draws uniformly from the lexicon words sharing the masked token's tag,
// excluding the original word.
class LexiconMaskFiller : public MaskFiller {
 public:
  explicit LexiconMaskFiller(const PosLexicon& lexicon) : lexicon_(lexicon) {}
  absl::StatusOr<std::string> Fill(const Caption& caption,
                                   std::size_t position,
                                   Rng& rng) const override;
  bool CanFill(const Caption& caption, std::size_t position) const override;

 private:
  const PosLexicon& lexicon_;
};

// Unknown words are tagged kOther. Fails on empty input.
absl::StatusOr<Caption> TagTokens(const std::vector<std::string>& tokens,
                                  const PosLexicon& lexicon);

// A negative rule that does not apply to the caption reports
// FailedPrecondition; IsNotApplicable recognizes it.
bool IsNotApplicable(const absl::Status& status);

// Exchanges two noun positions holding distinct words.
absl::StatusOr<Caption> SwapNouns(const Caption& caption, Rng& rng);

// Replaces one NOUN/VERB/ADJ token with a different same-tag word.
absl::StatusOr<Caption> SubstituteMasked(const Caption& caption,
                                         const MaskFiller& filler, Rng& rng);
absl::StatusOr<Caption> SubstituteMasked(const Caption& caption,
                                         const PosLexicon& lexicon, Rng& rng);

enum class NegativeKind { kNounSwap, kSubstitution };
std::string NegativeKindName(NegativeKind kind);
absl::StatusOr<NegativeKind> ParseNegativeKind(const std::string& name);

struct TextualNegative {
  Caption caption;
  NegativeKind kind;
  int slot = 0;
};

struct TextualNegativeSet {
  std::string source_id;
  std::vector<TextualNegative> negatives;

  bool empty() const { return negatives.empty(); }
  std::size_t size() const { return negatives.size(); }
};

// Up to k_per_kind distinct negatives per kind, noun swaps first. Slots
// follow generation order. An inapplicable caption yields an empty set.
absl::StatusOr<TextualNegativeSet> GenerateNegativeSet(
    const Caption& caption, int k_per_kind, const MaskFiller& filler,
    Rng& rng);
absl::StatusOr<TextualNegativeSet> GenerateNegativeSet(
    const Caption& caption, int k_per_kind, const PosLexicon& lexicon,
    Rng& rng);

// Corpus lines: "id<TAB>token token ...".
struct CorpusLine {
  std::string id;
  std::vector<std::string> tokens;
};
absl::StatusOr<std::vector<CorpusLine>> ReadCorpus(const std::string& path);
absl::Status WriteCorpus(const std::string& path,
                         const std::vector<CorpusLine>& lines);

// Negative corpus lines: "source_id<TAB>slot<TAB>kind<TAB>tokens...".
absl::Status WriteNegativeCorpus(const std::string& path,
                                 const std::vector<TextualNegativeSet>& sets);
// Re-tags with `lexicon`; sets keep file order.
absl::StatusOr<std::vector<TextualNegativeSet>> ReadNegativeCorpus(
    const std::string& path, const PosLexicon& lexicon);

}  // namespace ahnpl

#endif  // AHNPL_NEGATIVE_TEXTGEN_H_
