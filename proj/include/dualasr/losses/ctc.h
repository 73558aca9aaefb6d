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

#ifndef DUALASR_LOSSES_CTC_H_
#define DUALASR_LOSSES_CTC_H_

#include <span>
#include <stdexcept>

#include "dualasr/tensor/tensor.h"

namespace dualasr {

// The target needs more frames than available; the likelihood is zero.
class CtcInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Frames required to emit `target`: its length plus one blank between every
// pair of equal adjacent labels.
int CtcMinFrames(std::span<const int> target);

// Negative log-likelihood of `target` under per-frame distributions
// softmax(logits) [T x V], summed over all blank-extended alignments. The
// forward-backward recursions run in log space in double precision.
// Throws CtcInfeasibleError when T < CtcMinFrames(target), and
// std::invalid_argument when the target contains the blank id.
template <typename T>
Tensor<T> CtcLoss(const Tensor<T>& logits, std::span<const int> target,
                  int blank);

// Same as CtcLoss but takes log-probabilities directly.
template <typename T>
Tensor<T> CtcLossFromLogProbs(const Tensor<T>& log_probs,
                              std::span<const int> target, int blank);

}  // namespace dualasr

#endif  // DUALASR_LOSSES_CTC_H_
