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

#ifndef DUALASR_LOSSES_LOSSES_H_
#define DUALASR_LOSSES_LOSSES_H_

#include <span>

#include "dualasr/tensor/tensor.h"

namespace dualasr {

struct LossWeights {
  double ctc = 0.3;        // lambda_ctc
  double asr = 0.5;        // lambda_asr
  double subs = 0.5;       // lambda_subs
  double smoothing = 0.1;  // label smoothing epsilon

  // Throws std::invalid_argument outside ctc in [0,1], asr/subs >= 0,
  // smoothing in [0,1).
  void Validate() const;
};

// Mean over non-pad positions of the cross-entropy between softmax(logits)
// and the smoothed target (1 - eps on the gold id, eps / (V - 1) on every
// other id). Throws std::invalid_argument when every position is pad.
template <typename T>
Tensor<T> LabelSmoothedCrossEntropy(const Tensor<T>& logits,
                                    std::span<const int> targets, double eps,
                                    int pad_id);

// (1 - lambda_ctc) * attention + lambda_ctc * ctc.
template <typename T>
Tensor<T> HybridAsrLoss(const Tensor<T>& attention, const Tensor<T>& ctc,
                        double lambda_ctc);

}  // namespace dualasr

#endif  // DUALASR_LOSSES_LOSSES_H_
