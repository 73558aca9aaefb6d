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


#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "dualasr/decoding/ctc_prefix.h"
#include "dualasr/decoding/hypothesis_file.h"
#include "dualasr/decoding/search.h"
#include "dualasr/losses/ctc.h"
#include "dualasr/tensor/ops.h"
#include "dualasr/tokenizer/vocabulary.h"
#include "oracles.h"
#include "search_oracles.h"

namespace dualasr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
using Model = DualDecoderModel<double>;
using testing::ForEachSequence;
using testing::RandomFeatures;
using testing::RandomizeCross;
using testing::ReferenceScore;
using testing::ReferenceTupleScore;
using testing::ScaleOutputs;

// Three real tokens (5, 6, 7) on top of the reserved ids.
ModelConfig TinyConfig(CrossMode mode = CrossMode::kNone) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.ffn_dim = 12;
  c.dropout = 0.0;
  c.vocab_size = 8;
  c.feat_dim = 5;
  c.cross_mode = mode;
  return c;
}

std::vector<std::vector<double>> RandomDistribution(int frames, int vocab, std::mt19937_64& rng) {
  std::vector<double> logits(static_cast<size_t>(frames) * vocab);
  std::normal_distribution<double> normal(0.0, 1.5);
  for (double& v : logits) v = normal(rng);
  return testing::SoftmaxRows(logits, frames, vocab);
}

CtcPrefixScorer ScorerOf(const std::vector<std::vector<double>>& probs) {
  std::vector<double> lp;
  for (const auto& row : probs) {
    for (double p : row) lp.push_back(std::log(p));
  }
  return CtcPrefixScorer(lp, static_cast<int>(probs.size()), static_cast<int>(probs[0].size()), 0);
}

CtcPrefixScorer::State StateOf(const CtcPrefixScorer& scorer, const std::vector<int>& prefix) {
  auto s = scorer.Initial();
  for (int c : prefix) s = scorer.Extend(s, c);
  return s;
}

TEST(CtcPrefixTest, SingleFrameHandCase) {
  const std::vector<std::vector<double>> probs = {{0.3, 0.7}};
  const auto scorer = ScorerOf(probs);
  const auto s = scorer.Extend(scorer.Initial(), 1);
  EXPECT_NEAR(s.prefix, std::log(0.7), 1e-12);
  EXPECT_NEAR(scorer.Final(s), std::log(0.7), 1e-12);
  EXPECT_NEAR(scorer.Final(scorer.Initial()), std::log(0.3), 1e-12);
}

TEST(CtcPrefixTest, MatchesBruteForcePrefixProbabilities) {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int frames = 1 + trial % 5, vocab = 2 + trial % 3;
    const auto probs = RandomDistribution(frames, vocab, rng);
    const auto scorer = ScorerOf(probs);
    std::uniform_int_distribution<int> label(1, vocab - 1), length(0, 3);
    std::vector<int> prefix(length(rng));
    for (int& c : prefix) c = label(rng);
    double starts = 0.0, equals = 0.0;
    testing::BruteForcePrefixProbabilities(probs, prefix, 0, &starts, &equals);
    const auto s = StateOf(scorer, prefix);
    if (starts == 0.0) {
      EXPECT_EQ(s.prefix == kNegInf || prefix.empty(), true);
      continue;
    }
    EXPECT_NEAR(std::exp(s.prefix), starts, 1e-9);
    EXPECT_NEAR(std::exp(scorer.Final(s)), equals, 1e-9);
    ++compared;
  }
  EXPECT_GE(compared, 150);
}

TEST(CtcPrefixTest, MarginalizationIdentity) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = 1 + trial % 6, vocab = 2 + trial % 3;
    const auto probs = RandomDistribution(frames, vocab, rng);
    const auto scorer = ScorerOf(probs);
    std::uniform_int_distribution<int> label(1, vocab - 1);
    std::vector<int> prefix(trial % 3);
    for (int& c : prefix) c = label(rng);
    const auto g = StateOf(scorer, prefix);
    if (g.prefix == kNegInf) continue;
    double total = std::exp(scorer.Final(g));
    for (int c = 1; c < vocab; ++c) {
      const double p = scorer.Extend(g, c).prefix;
      if (p != kNegInf) total += std::exp(p);
    }
    EXPECT_NEAR(total, std::exp(g.prefix), 1e-9) << "trial " << trial;
  }
}

TEST(CtcPrefixTest, CompletedPrefixEqualsNegatedCtcLoss) {
  std::mt19937_64 rng(33);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int frames = 2 + trial % 8, vocab = 3 + trial % 4;
    std::vector<double> logits(static_cast<size_t>(frames) * vocab);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (double& v : logits) v = normal(rng);
    std::uniform_int_distribution<int> label(1, vocab - 1), length(1, 4);
    std::vector<int> target(length(rng));
    for (int& c : target) c = label(rng);
    if (CtcMinFrames(target) > frames) continue;
    const auto probs = testing::SoftmaxRows(logits, frames, vocab);
    const auto scorer = ScorerOf(probs);
    const double loss =
        CtcLoss(Tensor<double>::FromData({frames, vocab}, logits), target, 0).item();
    EXPECT_NEAR(scorer.Final(StateOf(scorer, target)), -loss, 1e-6);
    ++compared;
  }
  EXPECT_GE(compared, 100);
}

TEST(BeamSearchTest, BeamOneEqualsGreedy) {
  int utterances = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Model model(TinyConfig(), 100 + seed);
    ScaleOutputs(model, 3.0);
    for (int u = 0; u < 5; ++u) {
      const auto enc = model.Encode(RandomFeatures(10 + 4 * u, 5, seed * 10 + u));
      for (double w : {0.0, 0.3}) {
        SearchOptions opt;
        opt.beam = 1;
        opt.ctc_weight = w;
        const auto beam = BeamSearch(model, DecoderKind::kAsr, enc, opt);
        const auto greedy = GreedySearch(model, DecoderKind::kAsr, enc, opt);
        ASSERT_EQ(beam.size(), 1u);
        EXPECT_EQ(beam[0].tokens, greedy.tokens);
        EXPECT_EQ(beam[0].score, greedy.score);
      }
      ++utterances;
    }
  }
  EXPECT_EQ(utterances, 50);
}

TEST(BeamSearchTest, LargeBeamMatchesExhaustiveSearch) {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Model model(TinyConfig(), 200 + seed);
    ScaleOutputs(model, 2.0 + seed % 3);
    // 13 frames -> 4 encoder frames, L_max = 4.
    const auto enc = model.Encode(RandomFeatures(13, 5, 300 + seed));
    SearchOptions opt;
    opt.beam = 256;
    opt.ctc_weight = seed % 2 ? 0.3 : 0.0;
    opt.max_length_ratio = 1.0;
    ASSERT_EQ(MaxDecodeLength(model.config(), enc.length, opt.max_length_ratio), 4);
    double best = kNegInf;
    std::vector<int> best_seq;
    ForEachSequence(4, [&](const std::vector<int>& seq) {
      const double s = ReferenceScore(model, DecoderKind::kAsr, enc, seq, opt.ctc_weight);
      if (s > best) best = s, best_seq = seq;
    });
    const auto result = BeamSearch(model, DecoderKind::kAsr, enc, opt);
    EXPECT_EQ(result[0].tokens, best_seq) << "seed " << seed;
    EXPECT_NEAR(result[0].score, best, 1e-9);
  }
}

TEST(BeamSearchTest, SubtitleDecoderIgnoresCtc) {
  Model model(TinyConfig(), 7);
  ScaleOutputs(model, 3.0);
  const auto enc = model.Encode(RandomFeatures(13, 5, 8));
  SearchOptions opt;
  opt.beam = 256;
  opt.max_length_ratio = 1.0;
  double best = kNegInf;
  std::vector<int> best_seq;
  ForEachSequence(4, [&](const std::vector<int>& seq) {
    const double s = ReferenceScore(model, DecoderKind::kSubtitle, enc, seq, 0.0);
    if (s > best) best = s, best_seq = seq;
  });
  const auto result = BeamSearch(model, DecoderKind::kSubtitle, enc, opt);
  EXPECT_EQ(result[0].tokens, best_seq);
  EXPECT_NEAR(result[0].score, best, 1e-9);
}

TEST(BeamSearchTest, TiesBreakByTokenIds) {
  Model model(TinyConfig(), 9);
  for (const char* name : {"asr_dec.out.w", "asr_dec.out.b"}) {
    for (double& v : model.Param(name).mutable_data()) v = 0.0;
  }
  const auto enc = model.Encode(RandomFeatures(12, 5, 10));
  SearchOptions opt;
  opt.beam = 16;
  opt.nbest = 4;
  opt.ctc_weight = 0.0;
  const auto result = BeamSearch(model, DecoderKind::kAsr, enc, opt);
  ASSERT_EQ(result.size(), 4u);
  EXPECT_TRUE(result[0].tokens.empty());
  EXPECT_EQ(result[1].tokens, std::vector<int>{5});
  EXPECT_EQ(result[2].tokens, std::vector<int>{6});
  EXPECT_EQ(result[3].tokens, std::vector<int>{7});
  EXPECT_EQ(result[1].score, result[3].score);
  EXPECT_TRUE(GreedySearch(model, DecoderKind::kAsr, enc, opt).tokens.empty());
}

TEST(BeamSearchTest, RespectsLengthCapAndIsDeterministic) {
  Model model(TinyConfig(), 11);
  for (double& v : model.Param("asr_dec.out.b").mutable_data()) v = 0.0;
  model.Param("asr_dec.out.b").mutable_data()[Vocabulary::kEos] = -50.0;
  const auto enc = model.Encode(RandomFeatures(20, 5, 12));
  SearchOptions opt;
  opt.beam = 4;
  opt.nbest = 4;
  opt.max_length_ratio = 0.5;
  const auto a = BeamSearch(model, DecoderKind::kAsr, enc, opt);
  const auto b = BeamSearch(model, DecoderKind::kAsr, enc, opt);
  const int cap = MaxDecodeLength(model.config(), enc.length, 0.5);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(static_cast<int>(a[i].tokens.size()), cap);
    EXPECT_TRUE(a[i].finished);
    EXPECT_EQ(a[i].tokens, b[i].tokens);
    EXPECT_EQ(a[i].score, b[i].score);
    if (i > 0) EXPECT_GE(a[i - 1].score, a[i].score);
  }
}

TEST(BeamSearchTest, RejectsEmptyEncoderOutput) {
  Model model(TinyConfig(), 13);
  EncoderOutput<double> enc;
  EXPECT_THROW(BeamSearch(model, DecoderKind::kAsr, enc, SearchOptions()),
               std::invalid_argument);
}

TEST(TupleSearchTest, LargeBeamMatchesExhaustiveSearch) {
  for (CrossMode mode : {CrossMode::kSum, CrossMode::kConcat}) {
    for (uint64_t seed = 0; seed < 3; ++seed) {
      Model model(TinyConfig(mode), 400 + seed);
      RandomizeCross(model, 500 + seed);
      ScaleOutputs(model, 3.0);
      // 9 frames -> 3 encoder frames, L_max = 3.
      const auto enc = model.Encode(RandomFeatures(9, 5, 600 + seed));
      TupleOptions opt;
      opt.beam = 2000;
      opt.ctc_weight = seed == 1 ? 0.0 : 0.3;
      opt.max_length_ratio = 1.0;
      ASSERT_EQ(MaxDecodeLength(model.config(), enc.length, 1.0), 3);
      double best = kNegInf;
      std::vector<int> best_a, best_s;
      ForEachSequence(3, [&](const std::vector<int>& a) {
        ForEachSequence(3, [&](const std::vector<int>& s) {
          const double score = ReferenceTupleScore(model, enc, a, s, opt);
          if (score > best) best = score, best_a = a, best_s = s;
        });
      });
      const auto result = TupleBeamSearch(model, enc, opt);
      EXPECT_EQ(result[0].asr.tokens, best_a);
      EXPECT_EQ(result[0].subtitle.tokens, best_s);
      EXPECT_NEAR(result[0].score, best, 1e-9);
    }
  }
}

TEST(TupleSearchTest, ZeroSubtitleWeightRanksLikeSingleStreamSearch) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Model model(TinyConfig(CrossMode::kSum), 700 + seed);
    ScaleOutputs(model, 3.0);
    const auto enc = model.Encode(RandomFeatures(16, 5, 800 + seed));
    TupleOptions topt;
    topt.beam = 5;
    topt.nbest = 5;
    topt.w_subs = 0.0;
    topt.k_subs = 1;
    SearchOptions sopt;
    sopt.beam = 5;
    sopt.nbest = 5;
    const auto tuples = TupleBeamSearch(model, enc, topt);
    const auto single = BeamSearch(model, DecoderKind::kAsr, enc, sopt);
    ASSERT_EQ(tuples.size(), single.size());
    for (size_t i = 0; i < single.size(); ++i) {
      EXPECT_EQ(tuples[i].asr.tokens, single[i].tokens) << "seed " << seed << " rank " << i;
    }
  }
}

TEST(TupleSearchTest, BothStreamsEndingImmediatelyGiveOneEmptyTuple) {
  Model model(TinyConfig(CrossMode::kConcat), 15);
  for (const char* name : {"asr_dec.out.b", "sub_dec.out.b"}) {
    model.Param(name).mutable_data()[Vocabulary::kEos] = 100.0;
  }
  const auto enc = model.Encode(RandomFeatures(12, 5, 16));
  TupleOptions opt;
  opt.beam = 1;
  opt.nbest = 5;
  opt.ctc_weight = 0.0;
  const auto result = TupleBeamSearch(model, enc, opt);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_TRUE(result[0].asr.tokens.empty());
  EXPECT_TRUE(result[0].subtitle.tokens.empty());
  EXPECT_TRUE(result[0].finished());
}

TEST(TupleSearchTest, FinishedStreamStaysFrozen) {
  Model model(TinyConfig(CrossMode::kSum), 17);
  RandomizeCross(model, 18);
  model.Param("asr_dec.out.b").mutable_data()[Vocabulary::kEos] = 100.0;
  model.Param("sub_dec.out.b").mutable_data()[Vocabulary::kEos] = -100.0;
  const auto enc = model.Encode(RandomFeatures(16, 5, 19));
  TupleOptions opt;
  opt.beam = 3;
  opt.ctc_weight = 0.0;
  const auto result = TupleBeamSearch(model, enc, opt);
  EXPECT_TRUE(result[0].asr.tokens.empty());
  EXPECT_EQ(static_cast<int>(result[0].subtitle.tokens.size()),
            MaxDecodeLength(model.config(), enc.length, opt.max_length_ratio));
  EXPECT_NEAR(result[0].score,
              ReferenceTupleScore(model, enc, result[0].asr.tokens, result[0].subtitle.tokens, opt),
              1e-9);
}

TEST(TupleSearchTest, RequiresCrossConnections) {
  Model model(TinyConfig(), 20);
  const auto enc = model.Encode(RandomFeatures(12, 5, 21));
  EXPECT_THROW(TupleBeamSearch(model, enc, TupleOptions()), std::logic_error);
}

TEST(HypothesisFileTest, RoundTrip) {
  const std::vector<UtteranceHypotheses> hyps = {
      {"a", {{-1.5, "het huis"}, {-2.25, "het uis"}}},
      {"b", {{-0.5, ""}}},
      {"a", {{-3.0, "ja"}}}};
  const std::string path = ::testing::TempDir() + "/hyps.txt";
  WriteHypotheses(path, hyps);
  const auto back = ReadHypotheses(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].nbest.size(), 2u);
  EXPECT_EQ(back[0].nbest[1].text, "het uis");
  EXPECT_DOUBLE_EQ(back[0].nbest[1].score, -2.25);
  EXPECT_EQ(back[1].nbest[0].text, "");
  EXPECT_EQ(back[2].id, "a");
  std::remove(path.c_str());
}

}  // namespace
}  // namespace dualasr
