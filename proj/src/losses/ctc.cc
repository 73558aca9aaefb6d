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

#include "dualasr/losses/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dualasr/tensor/ops.h"

namespace dualasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

int CtcMinFrames(std::span<const int> target) {
  int frames = static_cast<int>(target.size());
  for (size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++frames;
  }
  return frames;
}

template <typename T>
Tensor<T> CtcLossFromLogProbs(const Tensor<T>& log_probs,
                              std::span<const int> target, int blank) {
  if (log_probs.rank() != 2) throw ShapeError("CTC expects [T x V] input");
  const int frames = log_probs.dim(0);
  const int vocab = log_probs.dim(1);
  for (int y : target) {
    if (y == blank) throw std::invalid_argument("CTC target contains blank");
    if (y < 0 || y >= vocab) throw std::invalid_argument("CTC label out of range");
  }
  const int needed = CtcMinFrames(target);
  if (frames < needed) {
    throw CtcInfeasibleError("CTC target needs " + std::to_string(needed) +
                             " frames, only " + std::to_string(frames) +
                             " available");
  }

  // Blank-extended label sequence: b y1 b y2 ... yn b.
  const int states = 2 * static_cast<int>(target.size()) + 1;
  std::vector<int> ext(states, blank);
  for (size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto can_skip = [&](int s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  const auto lp = log_probs.data();
  auto logp = [&](int t, int k) {
    return static_cast<double>(lp[static_cast<size_t>(t) * vocab + k]);
  };

  std::vector<double> alpha(static_cast<size_t>(frames) * states, kNegInf);
  auto A = [&](int t, int s) -> double& {
    return alpha[static_cast<size_t>(t) * states + s];
  };
  A(0, 0) = logp(0, ext[0]);
  if (states > 1) A(0, 1) = logp(0, ext[1]);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < states; ++s) {
      double v = A(t - 1, s);
      if (s >= 1) v = LogAdd(v, A(t - 1, s - 1));
      if (can_skip(s)) v = LogAdd(v, A(t - 1, s - 2));
      A(t, s) = v == kNegInf ? kNegInf : v + logp(t, ext[s]);
    }
  }
  double log_lik = A(frames - 1, states - 1);
  if (states > 1) log_lik = LogAdd(log_lik, A(frames - 1, states - 2));
  if (log_lik == kNegInf) {
    throw CtcInfeasibleError("CTC likelihood underflowed to zero");
  }

  return MakeOpResult<T>(
      "CtcLoss", Shape{}, std::vector<T>{static_cast<T>(-log_lik)},
      {&log_probs},
      [lpn = log_probs.node_ptr(), alpha = std::move(alpha),
       ext = std::move(ext), frames, states, vocab, blank,
       log_lik](Tape<T>& tape, Node<T>& self) {
        const auto& lpv = lpn->value;
        auto logp = [&](int t, int k) {
          return static_cast<double>(lpv[static_cast<size_t>(t) * vocab + k]);
        };
        auto skip_from = [&](int s) {  // s -> s + 2 allowed
          return s + 2 < states && ext[s + 2] != blank && ext[s + 2] != ext[s];
        };
        // beta(t, s): log-probability of frames t+1.. given state s at t.
        std::vector<double> beta(states, kNegInf), next(states, kNegInf);
        beta[states - 1] = 0.0;
        if (states > 1) beta[states - 2] = 0.0;
        auto& g = tape.GradOf(lpn.get());
        const double upstream = static_cast<double>(self.grad[0]);
        std::vector<double> occupancy(vocab);
        for (int t = frames - 1; t >= 0; --t) {
          std::fill(occupancy.begin(), occupancy.end(), kNegInf);
          for (int s = 0; s < states; ++s) {
            const double a = alpha[static_cast<size_t>(t) * states + s];
            if (a == kNegInf || beta[s] == kNegInf) continue;
            occupancy[ext[s]] = LogAdd(occupancy[ext[s]], a + beta[s]);
          }
          for (int k = 0; k < vocab; ++k) {
            if (occupancy[k] == kNegInf) continue;
            g[static_cast<size_t>(t) * vocab + k] +=
                static_cast<T>(-upstream * std::exp(occupancy[k] - log_lik));
          }
          if (t == 0) break;
          for (int s = 0; s < states; ++s) {
            double v = beta[s] + logp(t, ext[s]);
            if (s + 1 < states) v = LogAdd(v, beta[s + 1] + logp(t, ext[s + 1]));
            if (skip_from(s)) v = LogAdd(v, beta[s + 2] + logp(t, ext[s + 2]));
            next[s] = v;
          }
          std::swap(beta, next);
        }
      });
}

template <typename T>
Tensor<T> CtcLoss(const Tensor<T>& logits, std::span<const int> target,
                  int blank) {
  return CtcLossFromLogProbs(LogSoftmax(logits), target, blank);
}

template Tensor<float> CtcLoss(const Tensor<float>&, std::span<const int>, int);
template Tensor<double> CtcLoss(const Tensor<double>&, std::span<const int>,
                                int);
template Tensor<float> CtcLossFromLogProbs(const Tensor<float>&,
                                           std::span<const int>, int);
template Tensor<double> CtcLossFromLogProbs(const Tensor<double>&,
                                            std::span<const int>, int);

}  // namespace dualasr
