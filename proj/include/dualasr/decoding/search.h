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


#ifndef DUALASR_DECODING_SEARCH_H_
#define DUALASR_DECODING_SEARCH_H_

#include <vector>

#include "dualasr/decoding/ctc_prefix.h"
#include "dualasr/transformer/model.h"

namespace dualasr {

struct SearchOptions {
  int beam = 20;
  double ctc_weight = 0.3;        // ASR decoder only
  double max_length_ratio = 1.5;  // L_max = floor(ratio * T'), at least 1
  int nbest = 1;

  void Validate() const;
};

struct Hypothesis {
  std::vector<int> tokens;  // without sos and eos
  double score = 0.0;       // (1 - ctc_weight) * attention + ctc_weight * ctc
  double attention = 0.0;   // summed attention log-probabilities
  double ctc = 0.0;         // CTC prefix score, full-sequence score once finished
  bool finished = false;
  CtcPrefixScorer::State ctc_state;
};

struct TupleOptions {
  int beam = 20;
  int k_asr = 0;   // per-stream candidates, 0 means `beam`
  int k_subs = 0;
  double w_asr = 0.5;
  double w_subs = 0.5;
  double ctc_weight = 0.3;
  double max_length_ratio = 1.5;
  int nbest = 1;

  void Validate() const;
};

struct TupleHypothesis {
  Hypothesis asr;
  Hypothesis subtitle;
  double score = 0.0;  // w_asr * asr.score + w_subs * subtitle.score
  bool finished() const { return asr.finished && subtitle.finished; }
};

int MaxDecodeLength(const ModelConfig& config, int encoder_frames, double ratio);

// Candidate next tokens: every non-reserved id. eos is scored separately.
bool IsCandidateToken(int id);

// Per-frame CTC log-probabilities of the encoder output, row-major.
template <typename T>
CtcPrefixScorer MakeCtcScorer(const DualDecoderModel<T>& model, const EncoderOutput<T>& enc);

// Breadth-wise joint CTC/attention search on one decoder. Finished
// hypotheses keep their place in the beam with a fixed score; the search
// stops once every beam entry is finished. Equal scores are ordered by the
// token ids of the hypotheses (eos included), smaller first. Returns up to
// `nbest` hypotheses, best first.
template <typename T>
std::vector<Hypothesis> BeamSearch(const DualDecoderModel<T>& model, DecoderKind decoder,
                                   const EncoderOutput<T>& enc, const SearchOptions& options);

// Argmax of the combined score at every step. Same result as BeamSearch
// with beam 1.
template <typename T>
Hypothesis GreedySearch(const DualDecoderModel<T>& model, DecoderKind decoder,
                        const EncoderOutput<T>& enc, const SearchOptions& options);

// Synchronous search over (ASR, subtitle) pairs on a cross-connected model.
// Each live stream proposes its top-k extensions and the tuples are formed
// from their cross product. A stream that emitted eos is frozen and the
// other stream keeps attending to its last state. CTC scores only the ASR
// stream. Throws std::logic_error on a model without cross connections.
template <typename T>
std::vector<TupleHypothesis> TupleBeamSearch(const DualDecoderModel<T>& model,
                                             const EncoderOutput<T>& enc,
                                             const TupleOptions& options);

}  // namespace dualasr

#endif  // DUALASR_DECODING_SEARCH_H_
