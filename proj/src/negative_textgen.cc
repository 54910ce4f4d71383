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

#include "ahnpl/negative_textgen.h"

#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"

namespace ahnpl {
namespace {

bool IsMaskableTag(PosTag tag) {
  return tag == PosTag::kNoun || tag == PosTag::kVerb || tag == PosTag::kAdj;
}

absl::Status NotApplicable(absl::string_view why) {
  return absl::FailedPreconditionError(why);
}

std::vector<std::string> SplitTokens(absl::string_view text) {
  return absl::StrSplit(text, ' ', absl::SkipEmpty());
}

}  // namespace

std::string PosTagName(PosTag tag) {
  switch (tag) {
    case PosTag::kNoun:
      return "NOUN";
    case PosTag::kVerb:
      return "VERB";
    case PosTag::kAdj:
      return "ADJ";
    case PosTag::kDet:
      return "DET";
    case PosTag::kAdp:
      return "ADP";
    case PosTag::kOther:
      return "OTHER";
  }
  return "OTHER";
}

absl::StatusOr<PosTag> ParsePosTag(const std::string& name) {
  for (PosTag tag : {PosTag::kNoun, PosTag::kVerb, PosTag::kAdj, PosTag::kDet,
                     PosTag::kAdp, PosTag::kOther}) {
    if (PosTagName(tag) == name) return tag;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown POS tag '", name,
                                                 "'"));
}

std::string Caption::Text() const { return absl::StrJoin(tokens, " "); }

absl::Status ValidateCaption(const Caption& caption) {
  if (caption.tokens.empty()) {
    return absl::InvalidArgumentError("caption has no tokens");
  }
  if (caption.tokens.size() != caption.tags.size()) {
    return absl::InvalidArgumentError("tokens and tags differ in length");
  }
  for (const std::string& t : caption.tokens) {
    if (t.empty()) return absl::InvalidArgumentError("empty token");
  }
  return absl::OkStatus();
}

absl::Status PosLexicon::Add(const std::string& word, PosTag tag) {
  if (word.empty()) return absl::InvalidArgumentError("empty lexicon word");
  auto [it, inserted] = tag_of_.emplace(word, tag);
  if (!inserted && it->second != tag) {
    return absl::InvalidArgumentError(
        absl::StrCat("word '", word, "' tagged both ", PosTagName(it->second),
                     " and ", PosTagName(tag)));
  }
  by_tag_[tag].insert(word);
  return absl::OkStatus();
}

std::optional<PosTag> PosLexicon::Lookup(const std::string& word) const {
  auto it = tag_of_.find(word);
  if (it == tag_of_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>& PosLexicon::Candidates(PosTag tag) const {
  static const std::set<std::string>* const kEmpty = new std::set<std::string>;
  auto it = by_tag_.find(tag);
  return it == by_tag_.end() ? *kEmpty : it->second;
}

absl::Status PosLexicon::Validate() const {
  for (PosTag tag : {PosTag::kNoun, PosTag::kVerb, PosTag::kAdj}) {
    if (Candidates(tag).empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("lexicon has no ", PosTagName(tag), " words"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<PosLexicon> PosLexicon::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  PosLexicon lexicon;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, '\t');
    if (fields.size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": expected word<TAB>TAG"));
    }
    absl::StatusOr<PosTag> tag = ParsePosTag(fields[1]);
    if (!tag.ok()) return tag.status();
    if (absl::Status s = lexicon.Add(fields[0], *tag); !s.ok()) return s;
  }
  if (absl::Status s = lexicon.Validate(); !s.ok()) return s;
  return lexicon;
}

absl::Status PosLexicon::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  for (const auto& [word, tag] : tag_of_) {
    out << word << '\t' << PosTagName(tag) << '\n';
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Caption> LexiconTagger::Tag(
    const std::vector<std::string>& tokens) const {
  return TagTokens(tokens, lexicon_);
}

bool LexiconMaskFiller::CanFill(const Caption& caption,
                                std::size_t position) const {
  const PosTag tag = caption.tags[position];
  if (!IsMaskableTag(tag)) return false;
  const std::set<std::string>& candidates = lexicon_.Candidates(tag);
  return candidates.size() > 1 ||
         (candidates.size() == 1 &&
          *candidates.begin() != caption.tokens[position]);
}

absl::StatusOr<std::string> LexiconMaskFiller::Fill(const Caption& caption,
                                                    std::size_t position,
                                                    Rng& rng) const {
  const std::string& original = caption.tokens[position];
  std::vector<std::string> options;
  for (const std::string& word : lexicon_.Candidates(caption.tags[position])) {
    if (word != original) options.push_back(word);
  }
  if (options.empty()) {
    return NotApplicable(
        absl::StrCat("no alternative for '", original, "'"));
  }
  return options[UniformIndex(rng, options.size())];
}

absl::StatusOr<Caption> TagTokens(const std::vector<std::string>& tokens,
                                  const PosLexicon& lexicon) {
  if (tokens.empty()) return absl::InvalidArgumentError("no tokens to tag");
  Caption caption;
  caption.tokens = tokens;
  caption.tags.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (token.empty()) return absl::InvalidArgumentError("empty token");
    caption.tags.push_back(lexicon.Lookup(token).value_or(PosTag::kOther));
  }
  return caption;
}

bool IsNotApplicable(const absl::Status& status) {
  return status.code() == absl::StatusCode::kFailedPrecondition;
}

absl::StatusOr<Caption> SwapNouns(const Caption& caption, Rng& rng) {
  if (absl::Status s = ValidateCaption(caption); !s.ok()) return s;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t p = 0; p < caption.size(); ++p) {
    if (caption.tags[p] != PosTag::kNoun) continue;
    for (std::size_t q = p + 1; q < caption.size(); ++q) {
      if (caption.tags[q] == PosTag::kNoun &&
          caption.tokens[p] != caption.tokens[q]) {
        pairs.emplace_back(p, q);
      }
    }
  }
  if (pairs.empty()) return NotApplicable("fewer than two distinct nouns");
  const auto [p, q] = pairs[UniformIndex(rng, pairs.size())];
  Caption out = caption;
  std::swap(out.tokens[p], out.tokens[q]);
  return out;
}

absl::StatusOr<Caption> SubstituteMasked(const Caption& caption,
                                         const MaskFiller& filler, Rng& rng) {
  if (absl::Status s = ValidateCaption(caption); !s.ok()) return s;
  std::vector<std::size_t> positions;
  for (std::size_t p = 0; p < caption.size(); ++p) {
    if (IsMaskableTag(caption.tags[p]) && filler.CanFill(caption, p)) {
      positions.push_back(p);
    }
  }
  if (positions.empty()) return NotApplicable("no maskable token");
  const std::size_t position = positions[UniformIndex(rng, positions.size())];
  absl::StatusOr<std::string> word = filler.Fill(caption, position, rng);
  if (!word.ok()) return word.status();
  if (*word == caption.tokens[position] || word->empty()) {
    return absl::InternalError("mask filler returned the original word");
  }
  Caption out = caption;
  out.tokens[position] = *std::move(word);
  return out;
}

absl::StatusOr<Caption> SubstituteMasked(const Caption& caption,
                                         const PosLexicon& lexicon, Rng& rng) {
  return SubstituteMasked(caption, LexiconMaskFiller(lexicon), rng);
}

std::string NegativeKindName(NegativeKind kind) {
  return kind == NegativeKind::kNounSwap ? "NOUN_SWAP" : "SUBSTITUTION";
}

absl::StatusOr<NegativeKind> ParseNegativeKind(const std::string& name) {
  if (name == "NOUN_SWAP") return NegativeKind::kNounSwap;
  if (name == "SUBSTITUTION") return NegativeKind::kSubstitution;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown negative kind '", name, "'"));
}

absl::StatusOr<TextualNegativeSet> GenerateNegativeSet(
    const Caption& caption, int k_per_kind, const MaskFiller& filler,
    Rng& rng) {
  if (k_per_kind < 1) {
    return absl::InvalidArgumentError("k_per_kind must be >= 1");
  }
  if (absl::Status s = ValidateCaption(caption); !s.ok()) return s;

  TextualNegativeSet set;
  set.source_id = caption.id;
  std::set<std::vector<std::string>> seen = {caption.tokens};
  // Repeated draws may collide; a bounded number of retries per kind keeps
  // generation finite for captions with few distinct edits.
  const int max_attempts = 4 * k_per_kind + 4;

  for (NegativeKind kind :
       {NegativeKind::kNounSwap, NegativeKind::kSubstitution}) {
    int produced = 0;
    for (int attempt = 0; attempt < max_attempts && produced < k_per_kind;
         ++attempt) {
      absl::StatusOr<Caption> negative =
          kind == NegativeKind::kNounSwap
              ? SwapNouns(caption, rng)
              : SubstituteMasked(caption, filler, rng);
      if (!negative.ok()) {
        if (IsNotApplicable(negative.status())) break;
        return negative.status();
      }
      if (!seen.insert(negative->tokens).second) continue;
      TextualNegative entry{*std::move(negative), kind,
                            static_cast<int>(set.negatives.size())};
      set.negatives.push_back(std::move(entry));
      ++produced;
    }
  }
  return set;
}

absl::StatusOr<TextualNegativeSet> GenerateNegativeSet(
    const Caption& caption, int k_per_kind, const PosLexicon& lexicon,
    Rng& rng) {
  return GenerateNegativeSet(caption, k_per_kind, LexiconMaskFiller(lexicon),
                             rng);
}

absl::StatusOr<std::vector<CorpusLine>> ReadCorpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<CorpusLine> lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": expected id<TAB>tokens"));
    }
    CorpusLine entry{line.substr(0, tab),
                     SplitTokens(absl::string_view(line).substr(tab + 1))};
    if (entry.tokens.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": caption has no tokens"));
    }
    lines.push_back(std::move(entry));
  }
  return lines;
}

absl::Status WriteCorpus(const std::string& path,
                         const std::vector<CorpusLine>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  for (const CorpusLine& l : lines) {
    out << l.id << '\t' << absl::StrJoin(l.tokens, " ") << '\n';
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::Status WriteNegativeCorpus(const std::string& path,
                                 const std::vector<TextualNegativeSet>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  for (const TextualNegativeSet& set : sets) {
    for (const TextualNegative& n : set.negatives) {
      out << set.source_id << '\t' << n.slot << '\t'
          << NegativeKindName(n.kind) << '\t' << n.caption.Text() << '\n';
    }
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<std::vector<TextualNegativeSet>> ReadNegativeCorpus(
    const std::string& path, const PosLexicon& lexicon) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<TextualNegativeSet> sets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = absl::StrSplit(line, '\t');
    int slot = 0;
    if (fields.size() != 4 || !absl::SimpleAtoi(fields[1], &slot) ||
        slot < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no, ": expected source_id<TAB>slot<TAB>kind<TAB>"
                              "tokens"));
    }
    absl::StatusOr<NegativeKind> kind = ParseNegativeKind(fields[2]);
    if (!kind.ok()) return kind.status();
    absl::StatusOr<Caption> caption =
        TagTokens(SplitTokens(fields[3]), lexicon);
    if (!caption.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ":", line_no, ": ", caption.status().message()));
    }
    caption->id = fields[0];
    if (sets.empty() || sets.back().source_id != fields[0]) {
      sets.push_back(TextualNegativeSet{fields[0], {}});
    }
    sets.back().negatives.push_back(
        TextualNegative{*std::move(caption), *kind, slot});
  }
  return sets;
}

}  // namespace ahnpl
