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

#include "dualasr/corpus/batching.h"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "dualasr/common/seed.h"

namespace dualasr {

namespace {

Utterance Tokenize(const ManifestEntry& e, Features features, const Vocabulary& vocab) {
  Utterance u;
  u.id = e.id;
  u.task = e.task;
  u.features = NormalizeUtterance(features);
  if (!e.verbatim.empty()) u.verbatim = vocab.Encode(e.verbatim);
  if (!e.subtitle.empty()) u.subtitle = vocab.Encode(e.subtitle);
  return u;
}

void PadTargets(const std::vector<const std::vector<int>*>& seqs, int* max_len,
                std::vector<int>* padded, std::vector<int>* lengths,
                std::vector<uint8_t>* present) {
  *max_len = 0;
  for (const auto* s : seqs) {
    if (s) *max_len = std::max(*max_len, static_cast<int>(s->size()));
  }
  padded->assign(seqs.size() * *max_len, Vocabulary::kPad);
  lengths->assign(seqs.size(), 0);
  present->assign(seqs.size(), 0);
  for (size_t i = 0; i < seqs.size(); ++i) {
    if (!seqs[i]) continue;
    (*present)[i] = 1;
    (*lengths)[i] = static_cast<int>(seqs[i]->size());
    std::copy(seqs[i]->begin(), seqs[i]->end(), padded->begin() + i * *max_len);
  }
}

}  // namespace

std::vector<Utterance> LoadUtterances(const std::vector<ManifestEntry>& entries,
                                      const Vocabulary& vocab) {
  std::vector<Utterance> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    out.push_back(Tokenize(e, ReadFeatureFile(e.feature_path), vocab));
  }
  return out;
}

std::vector<Utterance> TokenizeSplit(const std::vector<CorpusUtterance>& split,
                                     const Vocabulary& vocab) {
  std::vector<Utterance> out;
  out.reserve(split.size());
  for (const auto& u : split) out.push_back(Tokenize(u.entry, u.features, vocab));
  return out;
}

const char* MixingName(Mixing mixing) {
  switch (mixing) {
    case Mixing::kVerbatimOnly:
      return "verbatim-only";
    case Mixing::kSubtitleOnly:
      return "subtitle-only";
    case Mixing::kEqualMix:
      return "equal-mix";
    case Mixing::kAsIs:
      return "as-is";
  }
  return "?";
}

Mixing ParseMixing(const std::string& name) {
  if (name == "verbatim-only") return Mixing::kVerbatimOnly;
  if (name == "subtitle-only") return Mixing::kSubtitleOnly;
  if (name == "equal-mix") return Mixing::kEqualMix;
  if (name == "as-is") return Mixing::kAsIs;
  throw std::invalid_argument("unknown mixing mode '" + name + "'");
}

Features Batch::FeaturesOf(int i) const {
  Features f(frames[i], dim);
  const auto begin = features.begin() + static_cast<size_t>(i) * max_frames * dim;
  std::copy(begin, begin + static_cast<size_t>(frames[i]) * dim, f.data.begin());
  return f;
}

std::span<const int> Batch::VerbatimOf(int i) const {
  return {verbatim.data() + static_cast<size_t>(i) * max_verbatim,
          static_cast<size_t>(verbatim_lengths[i])};
}

std::span<const int> Batch::SubtitleOf(int i) const {
  return {subtitle.data() + static_cast<size_t>(i) * max_subtitle,
          static_cast<size_t>(subtitle_lengths[i])};
}

int Batch::CountVerbatim() const {
  return static_cast<int>(std::count(has_verbatim.begin(), has_verbatim.end(), 1));
}

int Batch::CountSubtitle() const {
  return static_cast<int>(std::count(has_subtitle.begin(), has_subtitle.end(), 1));
}

Batch PackBatch(const std::vector<const Utterance*>& utterances, Mixing mixing,
                const BatchOptions& options, uint64_t seed) {
  Batch b;
  b.size = static_cast<int>(utterances.size());
  if (b.size == 0) throw std::invalid_argument("empty batch");
  b.dim = utterances[0]->features.dim;
  std::vector<Features> feats;
  std::vector<const std::vector<int>*> verb, subs;
  for (int i = 0; i < b.size; ++i) {
    const Utterance& u = *utterances[i];
    if (u.features.dim != b.dim) throw std::invalid_argument("feature dims differ in batch");
    b.ids.push_back(u.id);
    b.tasks.push_back(u.task);
    if (options.spec_augment) {
      std::mt19937_64 rng(DeriveSeed(seed, {static_cast<uint64_t>(i)}));
      SpecAugmentConfig cfg = options.augment;
      cfg.max_time_width = std::min(cfg.max_time_width, u.features.frames);
      cfg.max_freq_width = std::min(cfg.max_freq_width, u.features.dim);
      feats.push_back(SpecAugment(u.features, cfg, rng));
    } else {
      feats.push_back(u.features);
    }
    b.max_frames = std::max(b.max_frames, u.features.frames);
    const bool keep_v = mixing != Mixing::kSubtitleOnly && u.verbatim;
    const bool keep_s = mixing != Mixing::kVerbatimOnly && u.subtitle;
    verb.push_back(keep_v ? &*u.verbatim : nullptr);
    subs.push_back(keep_s ? &*u.subtitle : nullptr);
  }
  b.features.assign(static_cast<size_t>(b.size) * b.max_frames * b.dim, 0.0);
  for (int i = 0; i < b.size; ++i) {
    b.frames.push_back(feats[i].frames);
    std::copy(feats[i].data.begin(), feats[i].data.end(),
              b.features.begin() + static_cast<size_t>(i) * b.max_frames * b.dim);
  }
  PadTargets(verb, &b.max_verbatim, &b.verbatim, &b.verbatim_lengths, &b.has_verbatim);
  PadTargets(subs, &b.max_subtitle, &b.subtitle, &b.subtitle_lengths, &b.has_subtitle);
  return b;
}

std::vector<Batch> MakeBatches(std::span<const Utterance> pool,
                               const BatchOptions& options, uint64_t seed) {
  if (options.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  std::vector<const Utterance*> first, second;
  for (const auto& u : pool) {
    switch (options.mixing) {
      case Mixing::kVerbatimOnly:
        if (u.verbatim) first.push_back(&u);
        break;
      case Mixing::kSubtitleOnly:
        if (u.subtitle) first.push_back(&u);
        break;
      case Mixing::kEqualMix:
        if (u.task == Task::kVerbatim) first.push_back(&u);
        if (u.task == Task::kSubtitled) second.push_back(&u);
        break;
      case Mixing::kAsIs:
        first.push_back(&u);
        break;
    }
  }
  std::mt19937_64 rng(DeriveSeed(seed, {0}));
  std::shuffle(first.begin(), first.end(), rng);
  std::shuffle(second.begin(), second.end(), rng);
  const int B = options.batch_size;
  std::vector<Batch> batches;
  auto pack = [&](const std::vector<const Utterance*>& utts) {
    batches.push_back(PackBatch(utts, options.mixing, options,
                                DeriveSeed(seed, {1, batches.size()})));
  };

  if (options.mixing != Mixing::kEqualMix) {
    if (first.empty()) throw std::invalid_argument("no utterances for the requested mixing");
    for (size_t i = 0; i < first.size(); i += B) {
      pack({first.begin() + i, first.begin() + std::min(first.size(), i + B)});
    }
    return batches;
  }

  if (first.empty() || second.empty()) {
    throw std::invalid_argument("equal mixing needs verbatim and subtitled utterances");
  }
  size_t vi = 0, si = 0;
  bool v_done = false, s_done = false;
  for (size_t n = 0; !(v_done && s_done); ++n) {
    const int nv = n % 2 == 0 ? (B + 1) / 2 : B / 2;
    std::vector<const Utterance*> utts;
    for (int k = 0; k < nv; ++k) {
      utts.push_back(first[vi]);
      if (++vi == first.size()) vi = 0, v_done = true;
    }
    for (int k = 0; k < B - nv; ++k) {
      utts.push_back(second[si]);
      if (++si == second.size()) si = 0, s_done = true;
    }
    pack(utts);
  }
  return batches;
}

}  // namespace dualasr
