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

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"

namespace ahnpl {
namespace {

std::vector<std::string> Words(const std::string& text) {
  return absl::StrSplit(text, ' ');
}

PosLexicon BeachLexicon() {
  PosLexicon lex;
  for (const char* w : {"boy", "hat", "beach", "cat", "dog"}) {
    EXPECT_TRUE(lex.Add(w, PosTag::kNoun).ok());
  }
  for (const char* w : {"wearing", "playing", "runs", "sees"}) {
    EXPECT_TRUE(lex.Add(w, PosTag::kVerb).ok());
  }
  for (const char* w : {"red", "blue"}) {
    EXPECT_TRUE(lex.Add(w, PosTag::kAdj).ok());
  }
  for (const char* w : {"a", "the"}) EXPECT_TRUE(lex.Add(w, PosTag::kDet).ok());
  EXPECT_TRUE(lex.Add("on", PosTag::kAdp).ok());
  return lex;
}

std::vector<std::size_t> DiffPositions(const std::vector<std::string>& x,
                                       const std::vector<std::string>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) out.push_back(i);
  }
  return out;
}

TEST(PosTagTest, LexiconLookup) {
  PosLexicon lex;
  ASSERT_TRUE(lex.Add("boy", PosTag::kNoun).ok());
  ASSERT_TRUE(lex.Add("runs", PosTag::kVerb).ok());
  absl::StatusOr<Caption> c = TagTokens({"a", "boy", "runs"}, lex);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(c->tags,
            (std::vector<PosTag>{PosTag::kOther, PosTag::kNoun, PosTag::kVerb}));
}

TEST(PosTagTest, UnknownWordIsOther) {
  absl::StatusOr<Caption> c = TagTokens({"xyzzy"}, PosLexicon());
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(c->tags, std::vector<PosTag>{PosTag::kOther});
}

TEST(PosTagTest, EmptyInputIsError) {
  EXPECT_FALSE(TagTokens({}, PosLexicon()).ok());
}

TEST(PosLexiconTest, ConflictingTagRejected) {
  PosLexicon lex;
  ASSERT_TRUE(lex.Add("run", PosTag::kVerb).ok());
  EXPECT_TRUE(lex.Add("run", PosTag::kVerb).ok());
  EXPECT_FALSE(lex.Add("run", PosTag::kNoun).ok());
}

TEST(PosLexiconTest, ValidateNeedsOpenClasses) {
  PosLexicon lex;
  ASSERT_TRUE(lex.Add("cat", PosTag::kNoun).ok());
  EXPECT_FALSE(lex.Validate().ok());
  EXPECT_TRUE(BeachLexicon().Validate().ok());
}

TEST(PosLexiconTest, SaveLoadRoundTrip) {
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "lex.tsv").string();
  PosLexicon lex = BeachLexicon();
  ASSERT_TRUE(lex.Save(path).ok());
  absl::StatusOr<PosLexicon> back = PosLexicon::Load(path);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->size(), lex.size());
  for (PosTag tag : {PosTag::kNoun, PosTag::kVerb, PosTag::kAdj, PosTag::kDet,
                     PosTag::kAdp}) {
    EXPECT_EQ(back->Candidates(tag), lex.Candidates(tag));
  }
}

TEST(SwapNounsTest, BoyAndHat) {
  PosLexicon lex = BeachLexicon();
  const std::string source = "a boy wearing a red hat is playing on the beach";
  Caption c = *TagTokens(Words(source), lex);
  // Search for a seed whose draw picks (boy, hat); the expected text is the
  // source with exactly those two words exchanged.
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    Rng rng = MakeStream(seed, "test");
    absl::StatusOr<Caption> out = SwapNouns(c, rng);
    ASSERT_TRUE(out.ok());
    if (DiffPositions(c.tokens, out->tokens) ==
        std::vector<std::size_t>{1, 5}) {
      EXPECT_EQ(out->Text(), "a hat wearing a red boy is playing on the beach");
      EXPECT_EQ(out->tags, c.tags);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(SwapNounsTest, TwoNounsDifferInExactlyTheirPositions) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(Words("the cat sees a dog"), lex);
  Rng rng = MakeStream(1, "test");
  absl::StatusOr<Caption> out = SwapNouns(c, rng);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(DiffPositions(c.tokens, out->tokens),
            (std::vector<std::size_t>{1, 4}));
  EXPECT_EQ(out->Text(), "the dog sees a cat");
}

TEST(SwapNounsTest, OneNounNotApplicable) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(Words("the cat runs"), lex);
  Rng rng = MakeStream(1, "test");
  absl::StatusOr<Caption> out = SwapNouns(c, rng);
  EXPECT_TRUE(IsNotApplicable(out.status()));
}

TEST(SwapNounsTest, RepeatedNounNotApplicable) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(Words("a cat sees a cat"), lex);
  Rng rng = MakeStream(1, "test");
  EXPECT_TRUE(IsNotApplicable(SwapNouns(c, rng).status()));
}

TEST(SubstituteTest, ForcedSingleAlternative) {
  PosLexicon lex;
  ASSERT_TRUE(lex.Add("red", PosTag::kAdj).ok());
  ASSERT_TRUE(lex.Add("blue", PosTag::kAdj).ok());
  ASSERT_TRUE(lex.Add("hat", PosTag::kNoun).ok());
  Caption c = *TagTokens({"red", "hat"}, lex);
  Rng rng = MakeStream(3, "test");
  absl::StatusOr<Caption> out = SubstituteMasked(c, lex, rng);
  ASSERT_TRUE(out.ok());
  // "hat" is the only noun, so only "red" can be masked.
  EXPECT_EQ(out->Text(), "blue hat");
  EXPECT_EQ(out->tags, c.tags);
}

TEST(SubstituteTest, NoAlternativeNotApplicable) {
  PosLexicon lex;
  ASSERT_TRUE(lex.Add("red", PosTag::kAdj).ok());
  ASSERT_TRUE(lex.Add("hat", PosTag::kNoun).ok());
  Caption c = *TagTokens({"red", "hat"}, lex);
  Rng rng = MakeStream(3, "test");
  EXPECT_TRUE(IsNotApplicable(SubstituteMasked(c, lex, rng).status()));
}

TEST(SubstituteTest, PreservesLengthAndTagAtChangedPosition) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(
      Words("a boy wearing a red hat is playing on the beach"), lex);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = MakeStream(seed, "test");
    absl::StatusOr<Caption> out = SubstituteMasked(c, lex, rng);
    ASSERT_TRUE(out.ok());
    ASSERT_EQ(out->size(), c.size());
    std::vector<std::size_t> diff = DiffPositions(c.tokens, out->tokens);
    ASSERT_EQ(diff.size(), 1u);
    EXPECT_EQ(lex.Lookup(out->tokens[diff[0]]), c.tags[diff[0]]);
  }
}

class FirstCandidateFiller : public MaskFiller {
 public:
  absl::StatusOr<std::string> Fill(const Caption& caption,
                                   std::size_t position,
                                   Rng&) const override {
    return caption.tokens[position] == "zz" ? "yy" : "zz";
  }
  bool CanFill(const Caption& caption, std::size_t position) const override {
    return caption.tags[position] == PosTag::kNoun;
  }
};

TEST(SubstituteTest, PluggableFiller) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(Words("the cat runs"), lex);
  Rng rng = MakeStream(1, "test");
  absl::StatusOr<Caption> out =
      SubstituteMasked(c, FirstCandidateFiller(), rng);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->Text(), "the zz runs");
}

TEST(NegativeSetTest, OnePerKind) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(Words("a red cat sees a dog"), lex);
  Rng rng = MakeStream(5, "test");
  absl::StatusOr<TextualNegativeSet> set = GenerateNegativeSet(c, 1, lex, rng);
  ASSERT_TRUE(set.ok());
  ASSERT_EQ(set->size(), 2u);
  EXPECT_EQ(set->negatives[0].kind, NegativeKind::kNounSwap);
  EXPECT_EQ(set->negatives[1].kind, NegativeKind::kSubstitution);
  EXPECT_EQ(set->negatives[0].slot, 0);
  EXPECT_EQ(set->negatives[1].slot, 1);
}

TEST(NegativeSetTest, Deterministic) {
  PosLexicon lex = BeachLexicon();
  Caption c = *TagTokens(
      Words("a boy wearing a red hat is playing on the beach"), lex);
  Rng r1 = MakeStream(9, "test");
  Rng r2 = MakeStream(9, "test");
  absl::StatusOr<TextualNegativeSet> a = GenerateNegativeSet(c, 3, lex, r1);
  absl::StatusOr<TextualNegativeSet> b = GenerateNegativeSet(c, 3, lex, r2);
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_EQ(a->size(), b->size());
  for (std::size_t i = 0; i < a->size(); ++i) {
    EXPECT_EQ(a->negatives[i].caption.tokens, b->negatives[i].caption.tokens);
    EXPECT_EQ(a->negatives[i].kind, b->negatives[i].kind);
  }
}

TEST(NegativeSetTest, AllOtherGivesEmptySet) {
  Caption c = *TagTokens({"a", "a", "a"}, BeachLexicon());
  Rng rng = MakeStream(1, "test");
  absl::StatusOr<TextualNegativeSet> set = GenerateNegativeSet(c, 2, BeachLexicon(), rng);
  ASSERT_TRUE(set.ok());
  EXPECT_TRUE(set->empty());
}

TEST(NegativeSetTest, InvalidK) {
  Caption c = *TagTokens({"a", "cat"}, BeachLexicon());
  Rng rng = MakeStream(1, "test");
  EXPECT_FALSE(GenerateNegativeSet(c, 0, BeachLexicon(), rng).ok());
}

TEST(NegativeSetTest, InvariantsOverManyCaptions) {
  PosLexicon lex = BeachLexicon();
  const std::vector<std::string> words = {"a",     "the",  "boy",  "hat",
                                          "beach", "cat",  "dog",  "red",
                                          "blue",  "runs", "sees", "on"};
  Rng gen = MakeStream(21, "test");
  for (int t = 0; t < 500; ++t) {
    std::vector<std::string> tokens(1 + UniformIndex(gen, 8));
    for (std::string& w : tokens) w = words[UniformIndex(gen, words.size())];
    Caption c = *TagTokens(tokens, lex);
    Rng rng = MakeStream(t, "test");
    absl::StatusOr<TextualNegativeSet> set = GenerateNegativeSet(c, 3, lex, rng);
    ASSERT_TRUE(set.ok());
    std::set<std::vector<std::string>> seen;
    for (std::size_t i = 0; i < set->size(); ++i) {
      const TextualNegative& n = set->negatives[i];
      EXPECT_EQ(n.slot, static_cast<int>(i));
      EXPECT_NE(n.caption.tokens, c.tokens);
      EXPECT_TRUE(seen.insert(n.caption.tokens).second);
      std::vector<std::size_t> diff = DiffPositions(c.tokens, n.caption.tokens);
      if (n.kind == NegativeKind::kNounSwap) {
        ASSERT_EQ(diff.size(), 2u);
        std::vector<std::string> x = c.tokens, y = n.caption.tokens;
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        EXPECT_EQ(x, y);
      } else {
        ASSERT_EQ(diff.size(), 1u);
        EXPECT_EQ(lex.Lookup(n.caption.tokens[diff[0]]), c.tags[diff[0]]);
      }
    }
  }
}

TEST(CorpusIoTest, NegativeCorpusRoundTrip) {
  PosLexicon lex = BeachLexicon();
  std::vector<TextualNegativeSet> sets;
  for (const char* text : {"the cat sees a dog", "a red boy runs on the beach"}) {
    Caption c = *TagTokens(Words(text), lex);
    Rng rng = MakeStream(2, "test");
    TextualNegativeSet s = *GenerateNegativeSet(c, 2, lex, rng);
    s.source_id = text;
    sets.push_back(s);
  }
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "neg.tsv").string();
  ASSERT_TRUE(WriteNegativeCorpus(path, sets).ok());
  absl::StatusOr<std::vector<TextualNegativeSet>> back =
      ReadNegativeCorpus(path, lex);
  ASSERT_TRUE(back.ok()) << back.status();
  ASSERT_EQ(back->size(), sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ((*back)[i].source_id, sets[i].source_id);
    ASSERT_EQ((*back)[i].size(), sets[i].size());
    for (std::size_t j = 0; j < sets[i].size(); ++j) {
      EXPECT_EQ((*back)[i].negatives[j].caption.tokens,
                sets[i].negatives[j].caption.tokens);
      EXPECT_EQ((*back)[i].negatives[j].caption.tags,
                sets[i].negatives[j].caption.tags);
      EXPECT_EQ((*back)[i].negatives[j].kind, sets[i].negatives[j].kind);
      EXPECT_EQ((*back)[i].negatives[j].slot, sets[i].negatives[j].slot);
    }
  }
}

TEST(CorpusIoTest, CorpusRoundTrip) {
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "corpus.tsv").string();
  std::vector<CorpusLine> lines = {{"x1", {"a", "cat"}},
                                   {"x2", {"the", "dog", "runs"}}};
  ASSERT_TRUE(WriteCorpus(path, lines).ok());
  absl::StatusOr<std::vector<CorpusLine>> back = ReadCorpus(path);
  ASSERT_TRUE(back.ok());
  ASSERT_EQ(back->size(), 2u);
  EXPECT_EQ((*back)[1].id, "x2");
  EXPECT_EQ((*back)[1].tokens, lines[1].tokens);
}

TEST(NegativeKindTest, NamesRoundTrip) {
  for (NegativeKind k : {NegativeKind::kNounSwap, NegativeKind::kSubstitution}) {
    EXPECT_EQ(*ParseNegativeKind(NegativeKindName(k)), k);
  }
  EXPECT_EQ(NegativeKindName(NegativeKind::kNounSwap), "NOUN_SWAP");
  EXPECT_EQ(NegativeKindName(NegativeKind::kSubstitution), "SUBSTITUTION");
  EXPECT_FALSE(ParseNegativeKind("OTHER").ok());
}

}  // namespace
}  // namespace ahnpl
