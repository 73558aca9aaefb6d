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


#include "dualasr/decoding/search.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dualasr/tensor/ops.h"
#include "dualasr/tokenizer/vocabulary.h"

namespace dualasr {

namespace {

std::vector<double> RowLogSoftmax(std::span<const double> row) {
  const double max = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - max);
  const double log_z = max + std::log(sum);
  std::vector<double> out(row.size());
  for (size_t i = 0; i < row.size(); ++i) out[i] = row[i] - log_z;
  return out;
}

template <typename T>
std::vector<double> LastRow(const Tensor<T>& logits, int row) {
  const int v = logits.dim(1);
  const auto data = logits.data();
  std::vector<double> out(v);
  for (int k = 0; k < v; ++k) out[k] = static_cast<double>(data[static_cast<size_t>(row) * v + k]);
  return RowLogSoftmax(out);
}

std::vector<int> WithSos(const std::vector<int>& tokens) {
  std::vector<int> in = {Vocabulary::kSos};
  in.insert(in.end(), tokens.begin(), tokens.end());
  return in;
}

std::vector<int> Key(const Hypothesis& h) {
  std::vector<int> key = h.tokens;
  if (h.finished) key.push_back(Vocabulary::kEos);
  return key;
}

bool Better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return Key(a) < Key(b);
}

bool BetterTuple(const TupleHypothesis& a, const TupleHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto ka = Key(a.asr), kb = Key(b.asr);
  if (ka != kb) return ka < kb;
  return Key(a.subtitle) < Key(b.subtitle);
}

// All one-step continuations of `h`: eos first, then every candidate token
// in id order unless `force_eos`.
std::vector<Hypothesis> Expand(const Hypothesis& h, const std::vector<double>& log_probs,
                               const CtcPrefixScorer* scorer, double ctc_weight,
                               bool force_eos) {
  std::vector<Hypothesis> out;
  auto combine = [&](Hypothesis& c) {
    c.score = scorer ? (1.0 - ctc_weight) * c.attention + ctc_weight * c.ctc : c.attention;
  };
  Hypothesis end;
  end.tokens = h.tokens;
  end.finished = true;
  end.attention = h.attention + log_probs[Vocabulary::kEos];
  if (scorer) end.ctc = scorer->Final(h.ctc_state);
  combine(end);
  out.push_back(std::move(end));
  if (force_eos) return out;
  for (int c = 0; c < static_cast<int>(log_probs.size()); ++c) {
    if (!IsCandidateToken(c)) continue;
    Hypothesis next;
    next.tokens = h.tokens;
    next.tokens.push_back(c);
    next.attention = h.attention + log_probs[c];
    if (scorer) {
      next.ctc_state = scorer->Extend(h.ctc_state, c);
      next.ctc = next.ctc_state.prefix;
    }
    combine(next);
    out.push_back(std::move(next));
  }
  return out;
}

template <typename Item, typename Less>
void KeepBest(std::vector<Item>& items, size_t k, Less less) {
  if (items.size() > k) {
    std::partial_sort(items.begin(), items.begin() + k, items.end(), less);
    items.resize(k);
  } else {
    std::sort(items.begin(), items.end(), less);
  }
}

}  // namespace

void SearchOptions::Validate() const {
  if (beam < 1) throw std::invalid_argument("beam must be at least 1");
  if (ctc_weight < 0.0 || ctc_weight > 1.0) throw std::invalid_argument("ctc_weight outside [0,1]");
  if (!(max_length_ratio > 0.0)) throw std::invalid_argument("max_length_ratio must be positive");
  if (nbest < 1) throw std::invalid_argument("nbest must be at least 1");
}

void TupleOptions::Validate() const {
  if (beam < 1) throw std::invalid_argument("beam must be at least 1");
  if (k_asr < 0 || k_subs < 0) throw std::invalid_argument("negative per-stream k");
  if (w_asr < 0.0 || w_subs < 0.0) throw std::invalid_argument("negative stream weight");
  if (ctc_weight < 0.0 || ctc_weight > 1.0) throw std::invalid_argument("ctc_weight outside [0,1]");
  if (!(max_length_ratio > 0.0)) throw std::invalid_argument("max_length_ratio must be positive");
  if (nbest < 1) throw std::invalid_argument("nbest must be at least 1");
}

int MaxDecodeLength(const ModelConfig& config, int encoder_frames, double ratio) {
  const int l = static_cast<int>(std::floor(ratio * encoder_frames));
  return std::clamp(l, 1, config.max_target_length);
}

bool IsCandidateToken(int id) { return id >= Vocabulary::kNumReserved; }

template <typename T>
CtcPrefixScorer MakeCtcScorer(const DualDecoderModel<T>& model, const EncoderOutput<T>& enc) {
  NoGradScope<T> no_grad;
  const Tensor<T> logits = model.CtcLogits(enc);
  const int frames = logits.dim(0), v = logits.dim(1);
  std::vector<double> lp;
  lp.reserve(static_cast<size_t>(frames) * v);
  for (int t = 0; t < frames; ++t) {
    const auto row = LastRow(logits, t);
    lp.insert(lp.end(), row.begin(), row.end());
  }
  return CtcPrefixScorer(std::move(lp), frames, v, Vocabulary::kBlank);
}

template <typename T>
std::vector<Hypothesis> BeamSearch(const DualDecoderModel<T>& model, DecoderKind decoder,
                                   const EncoderOutput<T>& enc, const SearchOptions& options) {
  options.Validate();
  if (enc.length <= 0) throw std::invalid_argument("empty encoder output");
  NoGradScope<T> no_grad;
  const int max_len = MaxDecodeLength(model.config(), enc.length, options.max_length_ratio);
  std::optional<CtcPrefixScorer> scorer;
  if (decoder == DecoderKind::kAsr && options.ctc_weight > 0.0) {
    scorer.emplace(MakeCtcScorer(model, enc));
  }
  std::vector<Hypothesis> beam(1);
  if (scorer) beam[0].ctc_state = scorer->Initial();
  while (!std::all_of(beam.begin(), beam.end(), [](const Hypothesis& h) { return h.finished; })) {
    std::vector<Hypothesis> next;
    for (const Hypothesis& h : beam) {
      if (h.finished) {
        next.push_back(h);
        continue;
      }
      const auto input = WithSos(h.tokens);
      const auto lp = LastRow(model.DecodeTeacherForced(decoder, input, enc),
                              static_cast<int>(input.size()) - 1);
      auto grown = Expand(h, lp, scorer ? &*scorer : nullptr, options.ctc_weight,
                          static_cast<int>(h.tokens.size()) >= max_len);
      for (auto& g : grown) next.push_back(std::move(g));
    }
    KeepBest(next, options.beam, Better);
    beam = std::move(next);
  }
  if (static_cast<int>(beam.size()) > options.nbest) beam.resize(options.nbest);
  return beam;
}

template <typename T>
Hypothesis GreedySearch(const DualDecoderModel<T>& model, DecoderKind decoder,
                        const EncoderOutput<T>& enc, const SearchOptions& options) {
  options.Validate();
  if (enc.length <= 0) throw std::invalid_argument("empty encoder output");
  NoGradScope<T> no_grad;
  const int max_len = MaxDecodeLength(model.config(), enc.length, options.max_length_ratio);
  std::optional<CtcPrefixScorer> scorer;
  if (decoder == DecoderKind::kAsr && options.ctc_weight > 0.0) {
    scorer.emplace(MakeCtcScorer(model, enc));
  }
  Hypothesis h;
  if (scorer) h.ctc_state = scorer->Initial();
  while (!h.finished) {
    const auto input = WithSos(h.tokens);
    const auto lp = LastRow(model.DecodeTeacherForced(decoder, input, enc),
                            static_cast<int>(input.size()) - 1);
    auto grown = Expand(h, lp, scorer ? &*scorer : nullptr, options.ctc_weight,
                        static_cast<int>(h.tokens.size()) >= max_len);
    size_t best = 0;
    for (size_t i = 1; i < grown.size(); ++i) {
      if (grown[i].score > grown[best].score) best = i;
    }
    h = std::move(grown[best]);
  }
  return h;
}

template <typename T>
std::vector<TupleHypothesis> TupleBeamSearch(const DualDecoderModel<T>& model,
                                             const EncoderOutput<T>& enc,
                                             const TupleOptions& options) {
  options.Validate();
  if (model.config().cross_mode == CrossMode::kNone) {
    throw std::logic_error("tuple search needs a cross-connected model");
  }
  if (enc.length <= 0) throw std::invalid_argument("empty encoder output");
  NoGradScope<T> no_grad;
  const int max_len = MaxDecodeLength(model.config(), enc.length, options.max_length_ratio);
  const size_t k_asr = options.k_asr > 0 ? options.k_asr : options.beam;
  const size_t k_subs = options.k_subs > 0 ? options.k_subs : options.beam;
  std::optional<CtcPrefixScorer> scorer;
  if (options.ctc_weight > 0.0) scorer.emplace(MakeCtcScorer(model, enc));

  std::vector<TupleHypothesis> beam(1);
  if (scorer) beam[0].asr.ctc_state = scorer->Initial();
  while (!std::all_of(beam.begin(), beam.end(),
                      [](const TupleHypothesis& h) { return h.finished(); })) {
    std::vector<TupleHypothesis> next;
    for (const TupleHypothesis& h : beam) {
      if (h.finished()) {
        next.push_back(h);
        continue;
      }
      const auto asr_in = WithSos(h.asr.tokens);
      const auto sub_in = WithSos(h.subtitle.tokens);
      const auto logits = model.DecodeCrossConnected(asr_in, sub_in, enc);
      std::vector<Hypothesis> asr_options, sub_options;
      if (h.asr.finished) {
        asr_options.push_back(h.asr);
      } else {
        asr_options = Expand(h.asr, LastRow(logits.asr, static_cast<int>(asr_in.size()) - 1),
                             scorer ? &*scorer : nullptr, options.ctc_weight,
                             static_cast<int>(h.asr.tokens.size()) >= max_len);
        KeepBest(asr_options, k_asr, Better);
      }
      if (h.subtitle.finished) {
        sub_options.push_back(h.subtitle);
      } else {
        sub_options = Expand(h.subtitle,
                             LastRow(logits.subtitle, static_cast<int>(sub_in.size()) - 1),
                             nullptr, 0.0, static_cast<int>(h.subtitle.tokens.size()) >= max_len);
        KeepBest(sub_options, k_subs, Better);
      }
      for (const auto& a : asr_options) {
        for (const auto& s : sub_options) {
          TupleHypothesis t{a, s, options.w_asr * a.score + options.w_subs * s.score};
          next.push_back(std::move(t));
        }
      }
    }
    KeepBest(next, options.beam, BetterTuple);
    beam = std::move(next);
  }
  if (static_cast<int>(beam.size()) > options.nbest) beam.resize(options.nbest);
  return beam;
}

#define DUALASR_INSTANTIATE_SEARCH(T)                                                          \
  template CtcPrefixScorer MakeCtcScorer(const DualDecoderModel<T>&, const EncoderOutput<T>&); \
  template std::vector<Hypothesis> BeamSearch(const DualDecoderModel<T>&, DecoderKind,         \
                                              const EncoderOutput<T>&, const SearchOptions&);  \
  template Hypothesis GreedySearch(const DualDecoderModel<T>&, DecoderKind,                    \
                                   const EncoderOutput<T>&, const SearchOptions&);             \
  template std::vector<TupleHypothesis> TupleBeamSearch(                                       \
      const DualDecoderModel<T>&, const EncoderOutput<T>&, const TupleOptions&);

DUALASR_INSTANTIATE_SEARCH(float)
DUALASR_INSTANTIATE_SEARCH(double)

}  // namespace dualasr
