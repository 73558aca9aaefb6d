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

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "dualasr/metrics/metrics.h"

namespace dualasr {
namespace {

double Wer(const std::string& ref, const std::string& hyp) {
  return Evaluate({ref}, {hyp}, true, false).wer;
}

TEST(WerTest, HandCases) {
  EXPECT_DOUBLE_EQ(Wer("a b c", "a b c"), 0.0);
  EXPECT_NEAR(Wer("a b c", "a x c"), 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(Wer("a", ""), 100.0);
  EditCounts c = AlignWords(ScoringWords("a"), ScoringWords(""));
  EXPECT_EQ(c.deletions, 1);
  EditCounts ins = AlignWords(ScoringWords("a b"), ScoringWords("a x b y"));
  EXPECT_EQ(ins.insertions, 2);
  EXPECT_EQ(ins.substitutions, 0);
}

TEST(WerTest, CorpusAggregatesCountsNotRates) {
  // 1 error over 1 word and 0 errors over 9 words -> 10%, not 50%.
  EvalReport r = Evaluate({"a", "a b c d e f g h i"}, {"x", "a b c d e f g h i"},
                          true, false);
  EXPECT_DOUBLE_EQ(r.wer, 10.0);
}

TEST(WerTest, EmptyReferenceCorpusThrows) {
  EXPECT_THROW(Evaluate({""}, {"a"}, true, false), std::invalid_argument);
}

TEST(WerTest, NormalizationLowercasesAndStripsPunctuation) {
  EXPECT_EQ(ScoringWords("Het is, GOED!"),
            (std::vector<std::string>{"het", "is", "goed"}));
  EXPECT_EQ(ScoringWords("'t is"), (std::vector<std::string>{"'t", "is"}));
}

TEST(WerTest, InvariantToRelabelingAndOrder) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> word(0, 5), len(1, 8);
  std::vector<std::string> refs, hyps;
  for (int u = 0; u < 40; ++u) {
    std::string r, h;
    for (int i = len(rng); i > 0; --i) r += "w" + std::to_string(word(rng)) + " ";
    for (int i = len(rng); i > 0; --i) h += "w" + std::to_string(word(rng)) + " ";
    refs.push_back(r);
    hyps.push_back(h);
  }
  const double base = Evaluate(refs, hyps, true, false).wer;
  auto relabel = [](std::string s) {
    for (char& c : s) {
      if (c >= '0' && c <= '5') c = static_cast<char>('5' - (c - '0'));
    }
    return s;
  };
  std::vector<std::string> r2, h2;
  for (size_t i = 0; i < refs.size(); ++i) {
    r2.push_back(relabel(refs[i]));
    h2.push_back(relabel(hyps[i]));
  }
  EXPECT_DOUBLE_EQ(Evaluate(r2, h2, true, false).wer, base);
  std::reverse(refs.begin(), refs.end());
  std::reverse(hyps.begin(), hyps.end());
  EXPECT_DOUBLE_EQ(Evaluate(refs, hyps, true, false).wer, base);
  EXPECT_DOUBLE_EQ(Evaluate(refs, refs, true, false).wer, 0.0);
}

TEST(BleuTest, PerfectMatchIs100) {
  EvalReport r = Evaluate({"the cat sat on the mat", "a b"},
                          {"the cat sat on the mat", "a b"}, false, true);
  EXPECT_DOUBLE_EQ(100.0 * r.bleu.bleu, 100.0);
}

TEST(BleuTest, ShortHypothesisHandCase) {
  // p1 = 2/2, p2 = (1+1)/(1+1), p3 = p4 = (0+1)/(0+1); BP = exp(1 - 3/2).
  EvalReport r = Evaluate({"the cat sat"}, {"the cat"}, false, true);
  EXPECT_NEAR(r.bleu.brevity_penalty, std::exp(-0.5), 1e-12);
  EXPECT_NEAR(r.bleu.bleu, 0.6065306597126334, 1e-12);
}

TEST(BleuTest, ReorderedHandCase) {
  // Hyp bigrams ab bd dc (1 match), trigrams abd bdc (0), 4-gram abdc (0):
  // (1 * 2/4 * 1/3 * 1/2)^(1/4), BP = 1.
  EvalReport r = Evaluate({"a b c d"}, {"a b d c"}, false, true);
  EXPECT_EQ(r.bleu.matches[1], 1);
  EXPECT_EQ(r.bleu.totals[1], 3);
  EXPECT_NEAR(r.bleu.bleu, std::pow(1.0 / 12.0, 0.25), 1e-12);
}

TEST(BleuTest, ZeroFourGramOverlapStillPositive) {
  EvalReport r = Evaluate({"a b c d e"}, {"a b c x d e"}, false, true);
  EXPECT_EQ(r.bleu.matches[3], 0);
  EXPECT_GT(r.bleu.bleu, 0.0);
}

TEST(BleuTest, EmptyHypothesisScoresZero) {
  EvalReport r = Evaluate({"a b"}, {""}, false, true);
  EXPECT_EQ(r.bleu.bleu, 0.0);
}

TEST(ReportTest, MachineReadableTail) {
  EvalReport r = Evaluate({"a b c"}, {"a x c"}, true, true);
  const std::string text = FormatReport(r);
  EXPECT_NE(text.find("WER\t33.33\n"), std::string::npos);
  EXPECT_NE(text.find("BLEU\t"), std::string::npos);
}

}  // namespace
}  // namespace dualasr
