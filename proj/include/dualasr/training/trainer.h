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


#ifndef DUALASR_TRAINING_TRAINER_H_
#define DUALASR_TRAINING_TRAINER_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dualasr/corpus/batching.h"
#include "dualasr/corpus/corpus.h"
#include "dualasr/decoding/search.h"
#include "dualasr/losses/losses.h"
#include "dualasr/training/checkpoint.h"
#include "dualasr/training/optimizer.h"
#include "dualasr/transformer/model.h"

namespace dualasr {

using Model = DualDecoderModel<double>;

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  int accumulation = 1;
  int64_t warmup = 500;
  double peak_lr = 0.002;
  uint64_t seed = 1;
  LossWeights weights;
  bool freeze_encoder = false;
  Mixing mixing = Mixing::kEqualMix;
  bool spec_augment = false;
  double divergence_factor = 10.0;

  // 100 epochs, batch 32, accumulation 8, warmup 25000, peak 0.004.
  static TrainConfig FullScale();
  void Validate() const;
};

struct EpochSummary {
  int epoch = 0;
  int64_t steps = 0;  // optimizer steps so far
  int skipped_steps = 0;
  ValidationMetrics metrics;
  std::string checkpoint;  // empty when not written
};

struct TrainResult {
  std::vector<EpochSummary> epochs;
  bool diverged = false;
  std::string divergence_reason;
  std::vector<std::string> dropped_ctc;  // utterance ids, first epoch
};

// ASR decoder token accuracy (teacher forced, argmax on non-pad positions)
// and hybrid loss over the utterances carrying a verbatim target. Cross
// models use both streams when the subtitle target is present.
ValidationMetrics EvaluateAsr(const Model& model, std::span<const Utterance> dev,
                              const LossWeights& weights);

// Mean attention loss of the subtitle decoder over utterances with a
// subtitle target.
double EvaluateSubtitleLoss(const Model& model, std::span<const Utterance> dev,
                            const LossWeights& weights);

// Runs `config.epochs` epochs of masked multitask training. Each optimizer
// step averages the losses of `accumulation` consecutive micro-batches. A
// log line `step lr L_tot L_att,asr L_ctc L_att,subs` (tab separated) is
// written per step to `log` when non-null. With a non-empty `out_dir` a
// checkpoint `epoch-N.ckpt` is written after every epoch.
TrainResult Train(Model& model, std::span<const Utterance> train,
                  std::span<const Utterance> dev, const TrainConfig& config,
                  const std::string& out_dir = "", std::ostream* log = nullptr);

enum class PseudoLabelTarget {
  kVerbatimForSubtitled,  // subtitled utterances gain a verbatim target
  kSubtitleForVerbatim,   // verbatim utterances gain a subtitle target
  kBoth,
};

const char* PseudoLabelTargetName(PseudoLabelTarget target);
PseudoLabelTarget ParsePseudoLabelTarget(const std::string& name);

struct PseudoLabelResult {
  std::vector<ManifestEntry> entries;  // all of task parallel
  std::vector<std::string> skipped;    // ids with an empty or failed decode
};

// Fills the missing target with a beam-search decode of the matching
// decoder. Parallel entries are copied; entries not covered by `target` are
// left out. The provenance column names the generated target.
PseudoLabelResult PseudoLabel(const Model& model, const Vocabulary& vocab,
                              const std::vector<ManifestEntry>& manifest,
                              PseudoLabelTarget target, const SearchOptions& search);

// Cross-connected model with every non-cross parameter copied from the
// independent model `base`.
Model BuildCrossModel(const Model& base, CrossMode mode, uint64_t seed);

// Train() on parallel data; throws std::invalid_argument when an utterance
// lacks a target or the model has no cross connections.
TrainResult FinetuneCross(Model& cross, std::span<const Utterance> train,
                          std::span<const Utterance> dev, const TrainConfig& config,
                          const std::string& out_dir = "", std::ostream* log = nullptr);

}  // namespace dualasr

#endif  // DUALASR_TRAINING_TRAINER_H_
