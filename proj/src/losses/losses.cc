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

#include "dualasr/losses/losses.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dualasr/tensor/ops.h"

namespace dualasr {

void LossWeights::Validate() const {
  if (!(ctc >= 0.0 && ctc <= 1.0)) {
    throw std::invalid_argument("ctc weight must lie in [0, 1]");
  }
  if (!(asr >= 0.0) || !(subs >= 0.0)) {
    throw std::invalid_argument("decoder weights must be non-negative");
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("label smoothing must lie in [0, 1)");
  }
}

template <typename T>
Tensor<T> LabelSmoothedCrossEntropy(const Tensor<T>& logits,
                                    std::span<const int> targets, double eps,
                                    int pad_id) {
  if (logits.rank() != 2 || logits.dim(0) != static_cast<int>(targets.size())) {
    throw ShapeError("cross-entropy logits " + ShapeString(logits.shape()) +
                     " do not match " + std::to_string(targets.size()) +
                     " targets");
  }
  const int len = logits.dim(0), vocab = logits.dim(1);
  int counted = 0;
  for (int y : targets) counted += y != pad_id;
  if (counted == 0) {
    throw std::invalid_argument("cross-entropy over all-pad targets");
  }
  const T on = static_cast<T>(1.0 - eps);
  const T off = static_cast<T>(eps / (vocab - 1));
  std::vector<T> weight(static_cast<size_t>(len) * vocab, T(0));
  for (int t = 0; t < len; ++t) {
    if (targets[t] == pad_id) continue;
    if (targets[t] < 0 || targets[t] >= vocab) {
      throw std::invalid_argument("target id out of range");
    }
    T* row = weight.data() + static_cast<size_t>(t) * vocab;
    for (int k = 0; k < vocab; ++k) row[k] = off;
    row[targets[t]] = on;
  }
  Tensor<T> log_probs = LogSoftmax(logits);
  return Scale(WeightedSum(log_probs, std::span<const T>(weight)),
               static_cast<T>(-1.0 / counted));
}

template <typename T>
Tensor<T> HybridAsrLoss(const Tensor<T>& attention, const Tensor<T>& ctc,
                        double lambda_ctc) {
  return Add(Scale(attention, static_cast<T>(1.0 - lambda_ctc)),
             Scale(ctc, static_cast<T>(lambda_ctc)));
}

#define DUALASR_INSTANTIATE(T)                                             \
  template Tensor<T> LabelSmoothedCrossEntropy(                            \
      const Tensor<T>&, std::span<const int>, double, int);                \
  template Tensor<T> HybridAsrLoss(const Tensor<T>&, const Tensor<T>&, double);

DUALASR_INSTANTIATE(float)
DUALASR_INSTANTIATE(double)

#undef DUALASR_INSTANTIATE

}  // namespace dualasr
