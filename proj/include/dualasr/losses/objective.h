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

#ifndef DUALASR_LOSSES_OBJECTIVE_H_
#define DUALASR_LOSSES_OBJECTIVE_H_

#include <string>
#include <vector>

#include "dualasr/corpus/batching.h"
#include "dualasr/losses/losses.h"
#include "dualasr/tensor/tensor.h"
#include "dualasr/transformer/model.h"

namespace dualasr {

struct LossReport {
  double total = 0.0;     // L_tot
  double asr = 0.0;       // L_asr
  double att_asr = 0.0;   // L_att,asr
  double ctc = 0.0;       // L_ctc
  double att_subs = 0.0;  // L_att,subs
  int verbatim_utterances = 0;
  int subtitle_utterances = 0;
  int ctc_utterances = 0;
  std::vector<std::string> dropped_ctc;  // ids whose target needs more frames

  // lambda_asr * ((1 - lambda_ctc) * att_asr + lambda_ctc * ctc)
  //   + lambda_subs * att_subs
  double Recombine(const LossWeights& w) const;
};

template <typename T>
struct LossResult {
  Tensor<T> total;
  LossReport report;
};

// Multitask objective over one batch.
//
// The ASR terms (attention and CTC) are averaged over utterances carrying a
// verbatim target and the subtitle term over utterances carrying a subtitle
// target; the other utterances never enter those terms. A term whose weight
// is zero or whose utterance count is zero contributes nothing and is not
// computed. Per utterance, the attention loss is the token mean and the CTC
// loss is divided by the target length. Utterances too short for their CTC
// target are left out of the CTC mean and listed in `dropped_ctc`.
//
// Cross-connected models decode both streams jointly and require both
// targets on every utterance (std::invalid_argument otherwise).
template <typename T>
LossResult<T> TotalLoss(const DualDecoderModel<T>& model, const Batch& batch,
                        const LossWeights& weights);

// Decoder input (sos + y) and output (y + eos) for a target sequence.
std::vector<int> DecoderInput(std::span<const int> target);
std::vector<int> DecoderOutput(std::span<const int> target);

}  // namespace dualasr

#endif  // DUALASR_LOSSES_OBJECTIVE_H_
