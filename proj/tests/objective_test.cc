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
#include <map>
#include <random>

#include "gtest/gtest.h"
#include "dualasr/losses/ctc.h"
#include "dualasr/losses/objective.h"
#include "dualasr/tensor/ops.h"

namespace dualasr {
namespace {

using Model = DualDecoderModel<double>;

ModelConfig SmallConfig(CrossMode mode = CrossMode::kNone) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.ffn_dim = 16;
  c.dropout = 0.0;
  c.vocab_size = 12;
  c.feat_dim = 4;
  c.cross_mode = mode;
  return c;
}

Utterance MakeUtterance(int index, Task task, std::mt19937_64& rng) {
  Utterance u;
  u.id = "u" + std::to_string(index);
  u.task = task;
  const int frames = std::uniform_int_distribution<int>(12, 24)(rng);
  u.features = Features(frames, 4);
  std::normal_distribution<double> normal;
  for (double& v : u.features.data) v = normal(rng);
  std::uniform_int_distribution<int> token(5, 11), length(1, 3);
  auto target = [&] {
    std::vector<int> y(length(rng));
    for (int& t : y) t = token(rng);
    return y;
  };
  if (task != Task::kSubtitled) u.verbatim = target();
  if (task != Task::kVerbatim) u.subtitle = target();
  return u;
}

std::vector<Utterance> MakePool(const std::vector<Task>& tasks, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Utterance> pool;
  for (size_t i = 0; i < tasks.size(); ++i) {
    pool.push_back(MakeUtterance(static_cast<int>(i), tasks[i], rng));
  }
  return pool;
}

Batch Pack(const std::vector<Utterance>& pool, const std::vector<int>& which,
           Mixing mixing = Mixing::kAsIs) {
  std::vector<const Utterance*> utts;
  for (int i : which) utts.push_back(&pool[i]);
  return PackBatch(utts, mixing, BatchOptions(), 0);
}

// Runs backward and returns every parameter gradient (zeros when untouched).
std::map<std::string, std::vector<double>> Gradients(Model& model, const Batch& batch,
                                                     const LossWeights& w,
                                                     LossReport* report = nullptr) {
  for (auto& [name, p] : model.parameters()) const_cast<Tensor<double>&>(p).ZeroGrad();
  {
    Tape<double> tape;
    TapeScope<double> scope(tape);
    auto result = TotalLoss(model, batch, w);
    if (report) *report = result.report;
    if (result.total.requires_grad()) tape.Backward(result.total);
  }
  std::map<std::string, std::vector<double>> grads;
  for (const auto& [name, p] : model.parameters()) {
    grads[name] = p.has_grad() ? std::vector<double>(p.grad().begin(), p.grad().end())
                               : std::vector<double>(p.numel(), 0.0);
  }
  return grads;
}

bool IsAsrSide(const std::string& name) {
  return name.rfind("asr_dec.", 0) == 0 || name.rfind("ctc.", 0) == 0;
}

bool IsSubtitleSide(const std::string& name) { return name.rfind("sub_dec.", 0) == 0; }

TEST(TotalLossTest, SubtitleOnlyBatchMasksAsrExactly) {
  Model model(SmallConfig(), 1);
  const auto pool = MakePool({Task::kSubtitled, Task::kSubtitled, Task::kSubtitled}, 2);
  LossWeights w;
  LossReport report;
  const auto grads = Gradients(model, Pack(pool, {0, 1, 2}), w, &report);
  EXPECT_DOUBLE_EQ(report.total, w.subs * report.att_subs);
  EXPECT_EQ(report.verbatim_utterances, 0);
  double subs_norm = 0.0;
  for (const auto& [name, g] : grads) {
    if (IsAsrSide(name)) {
      for (double v : g) ASSERT_EQ(v, 0.0) << name;
    }
    if (IsSubtitleSide(name)) {
      for (double v : g) subs_norm += std::abs(v);
    }
  }
  EXPECT_GT(subs_norm, 0.0);
}

TEST(TotalLossTest, VerbatimOnlyBatchMasksSubtitleExactly) {
  Model model(SmallConfig(), 3);
  const auto pool = MakePool({Task::kVerbatim, Task::kVerbatim}, 4);
  LossReport report;
  const auto grads = Gradients(model, Pack(pool, {0, 1}), LossWeights(), &report);
  EXPECT_EQ(report.subtitle_utterances, 0);
  EXPECT_EQ(report.att_subs, 0.0);
  for (const auto& [name, g] : grads) {
    if (IsSubtitleSide(name)) {
      for (double v : g) ASSERT_EQ(v, 0.0) << name;
    }
  }
}

TEST(TotalLossTest, MixedBatchMatchesSubsetRecomputation) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Model model(SmallConfig(), 10 + seed);
    const auto pool = MakePool({Task::kVerbatim, Task::kSubtitled, Task::kVerbatim,
                                Task::kSubtitled, Task::kSubtitled, Task::kVerbatim},
                               20 + seed);
    const LossWeights w;
    const auto mixed = Gradients(model, Pack(pool, {0, 1, 2, 3, 4, 5}), w);
    const auto subs_only = Gradients(model, Pack(pool, {1, 3, 4}), w);
    const auto verb_only = Gradients(model, Pack(pool, {0, 2, 5}), w);
    for (const auto& [name, g] : mixed) {
      const std::vector<double>* ref = nullptr;
      if (IsSubtitleSide(name)) ref = &subs_only.at(name);
      if (IsAsrSide(name)) ref = &verb_only.at(name);
      if (!ref) continue;
      for (size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(g[i], (*ref)[i], 1e-9) << name;
    }
  }
}

TEST(TotalLossTest, RecombinationIdentity) {
  Model model(SmallConfig(), 5);
  const auto pool = MakePool({Task::kVerbatim, Task::kSubtitled, Task::kVerbatim,
                              Task::kSubtitled},
                             6);
  for (const auto& [a, s] : std::vector<std::pair<double, double>>{
           {0.5, 0.5}, {1.0, 0.0}, {0.7, 0.3}, {0.2, 1.3}}) {
    LossWeights w;
    w.asr = a;
    w.subs = s;
    const auto r = TotalLoss(model, Pack(pool, {0, 1, 2, 3}), w).report;
    EXPECT_NEAR(r.total, r.Recombine(w), 1e-9);
    EXPECT_NEAR(r.asr, (1 - w.ctc) * r.att_asr + w.ctc * r.ctc, 1e-12);
  }
}

TEST(TotalLossTest, VerbatimOnlyReducesToHybridAsrLoss) {
  Model model(SmallConfig(), 7);
  const auto pool = MakePool({Task::kVerbatim, Task::kVerbatim, Task::kVerbatim}, 8);
  LossWeights w;
  w.asr = 1.0;
  w.subs = 0.0;
  const auto result = TotalLoss(model, Pack(pool, {0, 1, 2}), w);
  double att = 0.0, ctc = 0.0;
  for (const auto& u : pool) {
    const auto enc = model.Encode(u.features);
    const auto& y = *u.verbatim;
    const auto out = DecoderOutput(y);
    att += LabelSmoothedCrossEntropy(model.DecodeTeacherForced(DecoderKind::kAsr,
                                                               DecoderInput(y), enc),
                                     std::span<const int>(out), w.smoothing, Vocabulary::kPad)
               .item();
    ctc += CtcLoss(model.CtcLogits(enc), std::span<const int>(y), Vocabulary::kBlank).item() /
           y.size();
  }
  EXPECT_NEAR(result.report.total, 0.7 * att / 3 + 0.3 * ctc / 3, 1e-12);
}

TEST(TotalLossTest, EmptyTaskContributesZeroAndInfeasibleCtcIsDropped) {
  Model model(SmallConfig(), 9);
  auto pool = MakePool({Task::kVerbatim, Task::kVerbatim}, 10);
  // 12 frames -> 3 encoder frames; six distinct labels cannot fit.
  pool[1].features = Features(12, 4);
  pool[1].verbatim = std::vector<int>{5, 6, 7, 8, 9, 10};
  LossWeights w;
  w.subs = 2.0;
  const auto r = TotalLoss(model, Pack(pool, {0, 1}), w).report;
  EXPECT_EQ(r.att_subs, 0.0);
  EXPECT_EQ(r.ctc_utterances, 1);
  ASSERT_EQ(r.dropped_ctc.size(), 1u);
  EXPECT_EQ(r.dropped_ctc[0], "u1");
  EXPECT_NEAR(r.total, r.Recombine(w), 1e-12);
}

TEST(TotalLossTest, CrossModelNeedsBothTargets) {
  Model model(SmallConfig(CrossMode::kSum), 11);
  const auto pool = MakePool({Task::kParallel, Task::kVerbatim}, 12);
  EXPECT_NO_THROW(TotalLoss(model, Pack(pool, {0}), LossWeights()));
  EXPECT_THROW(TotalLoss(model, Pack(pool, {0, 1}), LossWeights()), std::invalid_argument);
}

TEST(TotalLossTest, ZeroInitCrossReproducesIndependentLoss) {
  Model indep(SmallConfig(), 13);
  for (CrossMode mode : {CrossMode::kSum, CrossMode::kConcat}) {
    Model cross(SmallConfig(mode), 14);
    cross.InitializeFrom(indep, false);
    const auto pool = MakePool({Task::kParallel, Task::kParallel, Task::kParallel}, 15);
    const auto a = TotalLoss(indep, Pack(pool, {0, 1, 2}), LossWeights()).report;
    const auto b = TotalLoss(cross, Pack(pool, {0, 1, 2}), LossWeights()).report;
    EXPECT_NEAR(a.total, b.total, 1e-12);
    EXPECT_NEAR(a.att_subs, b.att_subs, 1e-12);
  }
}

}  // namespace
}  // namespace dualasr
