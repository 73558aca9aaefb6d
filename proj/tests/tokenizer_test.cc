// Copyright (c) 2026 The dualasr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <random>

#include "gtest/gtest.h"
#include "dualasr/tokenizer/vocabulary.h"

namespace dualasr {
namespace {

const std::string kM(Vocabulary::kMarker);

TEST(VocabularyTest, ReservedIds) {
  Vocabulary v;
  EXPECT_EQ(v.size(), Vocabulary::kNumReserved);
  EXPECT_EQ(Vocabulary::kBlank, 0);
  EXPECT_EQ(v.Token(Vocabulary::kBlank), "<blank>");
  EXPECT_NE(Vocabulary::kBlank, Vocabulary::kPad);
  EXPECT_LT(Vocabulary::kPad, Vocabulary::kNumReserved);
}

TEST(TrainBpeTest, FirstMergeByCountThenLexicographic) {
  // Units: "▁a" a a b (x2). Pairs (▁a,a), (a,a), (a,b) all occur twice;
  // "a" < "▁a" bytewise, and (a,a) < (a,b).
  Vocabulary base = Vocabulary::TrainBpe({"aaab", "aaab"}, {}, 0 + 5 + 3);
  EXPECT_EQ(base.num_base_units(), 3);
  EXPECT_TRUE(base.merges().empty());
  Vocabulary v = Vocabulary::TrainBpe({"aaab", "aaab"}, {}, 5 + 3 + 1);
  ASSERT_EQ(v.merges().size(), 1u);
  EXPECT_EQ(v.merges()[0], (Vocabulary::Merge{"a", "a"}));
  EXPECT_EQ(v.Token(v.size() - 1), "aa");
}

TEST(TrainBpeTest, FrequencyBeatsOrder) {
  // "zz" appears 3 times in total, "ab" only twice.
  Vocabulary v = Vocabulary::TrainBpe({"xzz", "xzz"}, {"yzz", "ab", "ab"}, 100);
  ASSERT_FALSE(v.merges().empty());
  EXPECT_EQ(v.merges()[0], (Vocabulary::Merge{"z", "z"}));
}

TEST(TrainBpeTest, CharacterVocabularyHasNoMerges) {
  Vocabulary v = Vocabulary::TrainBpe({"a b"}, {"b a"}, 5 + 2);
  EXPECT_TRUE(v.merges().empty());
  EXPECT_EQ(v.EncodeAsPieces("a b"),
            (std::vector<std::string>{kM + "a", kM + "b"}));
}

TEST(TrainBpeTest, Errors) {
  EXPECT_THROW(Vocabulary::TrainBpe({}, {}, 50), std::invalid_argument);
  EXPECT_THROW(Vocabulary::TrainBpe({"   "}, {""}, 50), std::invalid_argument);
  EXPECT_THROW(Vocabulary::TrainBpe({"abc"}, {}, 5 + 2), std::invalid_argument);
}

TEST(TrainBpeTest, Deterministic) {
  std::vector<std::string> a = {"het is goed", "ja ja", "goed zo"};
  std::vector<std::string> b = {"het is", "zo goed"};
  EXPECT_EQ(Vocabulary::TrainBpe(a, b, 30).merges(),
            Vocabulary::TrainBpe(a, b, 30).merges());
}

TEST(EncodeTest, EmptyString) {
  Vocabulary v = Vocabulary::TrainBpe({"abc"}, {}, 20);
  EXPECT_TRUE(v.Encode("").empty());
  EXPECT_EQ(v.Decode(std::vector<int>{}), "");
}

TEST(EncodeTest, GreedyLongestMatch) {
  Vocabulary v = Vocabulary::TrainBpe({"abab abab", "ab"}, {}, 100);
  // Everything merges up to whole words.
  EXPECT_EQ(v.EncodeAsPieces("abab ab"),
            (std::vector<std::string>{kM + "abab", kM + "ab"}));
  // An unseen word still decomposes into known units.
  EXPECT_EQ(v.Decode(v.Encode("abba")), "abba");
}

TEST(EncodeTest, UnseenCharacterBecomesUnk) {
  Vocabulary v = Vocabulary::TrainBpe({"ab"}, {}, 20);
  std::vector<int> ids = v.Encode("aq");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(ids[1], Vocabulary::kUnk);
  EXPECT_EQ(v.Encode("q")[0], Vocabulary::kUnk);
}

TEST(EncodeTest, RoundTripProperty) {
  // 1000 random lines over a small alphabet including an apostrophe.
  const std::string alphabet = "abcdefghijklmnoprstuvwz'";
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> nwords(1, 8), wlen(1, 7),
      ch(0, static_cast<int>(alphabet.size()) - 1);
  std::vector<std::string> lines;
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    const int n = nwords(rng);
    for (int w = 0; w < n; ++w) {
      if (w) line += ' ';
      const int len = wlen(rng);
      for (int c = 0; c < len; ++c) line += alphabet[ch(rng)];
    }
    lines.push_back(line);
  }
  std::vector<std::string> first(lines.begin(), lines.begin() + 500);
  std::vector<std::string> second(lines.begin() + 500, lines.end());
  Vocabulary v = Vocabulary::TrainBpe(first, second, 200);
  EXPECT_EQ(v.size(), 200);
  for (const auto& line : lines) {
    std::vector<int> ids = v.Encode(line);
    for (int id : ids) EXPECT_GE(id, Vocabulary::kNumReserved);
    EXPECT_EQ(v.Decode(ids), line);
  }
}

TEST(VocabularyFileTest, SaveLoadRoundTrip) {
  Vocabulary v = Vocabulary::TrainBpe({"het is goed", "'t is"}, {"jij"}, 25);
  const std::string path =
      (std::filesystem::temp_directory_path() / "dualasr_vocab_test.txt").string();
  v.Save(path);
  Vocabulary w = Vocabulary::Load(path);
  EXPECT_EQ(v, w);
  EXPECT_EQ(w.num_base_units(), v.num_base_units());
  EXPECT_EQ(w.Encode("het is goed"), v.Encode("het is goed"));
  std::remove(path.c_str());
}

TEST(VocabularyFileTest, RejectsBadHeader) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "dualasr_vocab_bad.txt").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("<pad>\n<sos>\n<eos>\n<unk>\n<blank>\n", f);
    std::fclose(f);
  }
  EXPECT_THROW(Vocabulary::Load(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST(VocabularyTest, FullScaleConstant) {
  EXPECT_EQ(Vocabulary::kFullScaleVocabSize, 5000);
  EXPECT_EQ(Vocabulary::kDeskVocabSize, 200);
}

}  // namespace
}  // namespace dualasr
