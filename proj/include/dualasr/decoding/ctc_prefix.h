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


#ifndef DUALASR_DECODING_CTC_PREFIX_H_
#define DUALASR_DECODING_CTC_PREFIX_H_

#include <vector>

namespace dualasr {

// Prefix probabilities of a CTC output distribution, extended one label at a
// time. All values are natural-log probabilities.
class CtcPrefixScorer {
 public:
  struct State {
    std::vector<double> r_n;  // prefix emitted, last frame on its final label
    std::vector<double> r_b;  // prefix emitted, last frame on blank
    double prefix = 0.0;      // log P(prefix is a prefix of the output)
    int last = -1;            // final label, -1 for the empty prefix
  };

  // `log_probs` is row-major [frames x vocab] and must be normalized per row.
  CtcPrefixScorer(std::vector<double> log_probs, int frames, int vocab, int blank);

  int frames() const { return frames_; }
  int vocab() const { return vocab_; }

  State Initial() const;
  // State of prefix + label; `label` must not be the blank.
  State Extend(const State& state, int label) const;
  // log P(output == prefix).
  double Final(const State& state) const;

 private:
  double lp(int t, int k) const { return log_probs_[static_cast<size_t>(t) * vocab_ + k]; }

  std::vector<double> log_probs_;
  int frames_;
  int vocab_;
  int blank_;
};

}  // namespace dualasr

#endif  // DUALASR_DECODING_CTC_PREFIX_H_
