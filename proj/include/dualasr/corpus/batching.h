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

#ifndef DUALASR_CORPUS_BATCHING_H_
#define DUALASR_CORPUS_BATCHING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualasr/corpus/corpus.h"
#include "dualasr/corpus/features.h"
#include "dualasr/tokenizer/vocabulary.h"

namespace dualasr {

// A tokenized utterance with normalized features.
struct Utterance {
  std::string id;
  Features features;
  std::optional<std::vector<int>> verbatim;
  std::optional<std::vector<int>> subtitle;
  Task task = Task::kVerbatim;
};

// Reads, normalizes and tokenizes manifest entries.
std::vector<Utterance> LoadUtterances(const std::vector<ManifestEntry>& entries,
                                      const Vocabulary& vocab);
// Same for an in-memory corpus split.
std::vector<Utterance> TokenizeSplit(const std::vector<CorpusUtterance>& split,
                                     const Vocabulary& vocab);

enum class Mixing {
  kVerbatimOnly,  // utterances with a verbatim target, subtitle target dropped
  kSubtitleOnly,  // utterances with a subtitle target, verbatim target dropped
  kEqualMix,      // verbatim-task and subtitled-task utterances, half each
  kAsIs,          // every utterance with every target it carries
};

const char* MixingName(Mixing mixing);
Mixing ParseMixing(const std::string& name);

// Padded batch. Features are zero-padded to max_frames; targets are padded
// with Vocabulary::kPad and carry a presence flag per utterance.
struct Batch {
  int size = 0;
  int max_frames = 0;
  int dim = 0;
  std::vector<std::string> ids;
  std::vector<Task> tasks;
  std::vector<double> features;  // [size x max_frames x dim]
  std::vector<int> frames;
  int max_verbatim = 0;
  std::vector<int> verbatim;  // [size x max_verbatim]
  std::vector<int> verbatim_lengths;
  std::vector<uint8_t> has_verbatim;
  int max_subtitle = 0;
  std::vector<int> subtitle;  // [size x max_subtitle]
  std::vector<int> subtitle_lengths;
  std::vector<uint8_t> has_subtitle;

  // Unpadded views of utterance i.
  Features FeaturesOf(int i) const;
  std::span<const int> VerbatimOf(int i) const;
  std::span<const int> SubtitleOf(int i) const;
  int CountVerbatim() const;
  int CountSubtitle() const;
};

struct BatchOptions {
  int batch_size = 16;
  Mixing mixing = Mixing::kEqualMix;
  bool spec_augment = false;
  SpecAugmentConfig augment;
};

// Builds one epoch of batches from `pool`, shuffled with `seed`.
//
// EqualMix alternates the rounding: even-numbered batches take ceil(B/2)
// verbatim and floor(B/2) subtitled utterances, odd-numbered batches the
// reverse, so B=1 alternates tasks. The epoch ends once the larger pool has
// been seen completely; the smaller pool is cycled. Throws
// std::invalid_argument when a required pool is empty.
std::vector<Batch> MakeBatches(std::span<const Utterance> pool,
                               const BatchOptions& options, uint64_t seed);

// Packs the given utterances in order into one batch.
Batch PackBatch(const std::vector<const Utterance*>& utterances, Mixing mixing,
                const BatchOptions& options, uint64_t seed);

}  // namespace dualasr

#endif  // DUALASR_CORPUS_BATCHING_H_
