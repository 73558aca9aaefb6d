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


#include "dualasr/decoding/ctc_prefix.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

CtcPrefixScorer::CtcPrefixScorer(std::vector<double> log_probs, int frames, int vocab,
                                 int blank)
    : log_probs_(std::move(log_probs)), frames_(frames), vocab_(vocab), blank_(blank) {
  if (frames <= 0) throw std::invalid_argument("CTC prefix scorer needs at least one frame");
  if (static_cast<int64_t>(log_probs_.size()) != static_cast<int64_t>(frames) * vocab) {
    throw std::invalid_argument("CTC prefix scorer: log-prob size mismatch");
  }
  if (blank < 0 || blank >= vocab) throw std::invalid_argument("blank outside vocabulary");
}

CtcPrefixScorer::State CtcPrefixScorer::Initial() const {
  State s;
  s.r_n.assign(frames_, kNegInf);
  s.r_b.resize(frames_);
  double acc = 0.0;
  for (int t = 0; t < frames_; ++t) {
    acc += lp(t, blank_);
    s.r_b[t] = acc;
  }
  return s;
}

CtcPrefixScorer::State CtcPrefixScorer::Extend(const State& g, int c) const {
  if (c == blank_ || c < 0 || c >= vocab_) {
    throw std::invalid_argument("CTC prefix extension with invalid label");
  }
  State h;
  h.last = c;
  h.r_n.assign(frames_, kNegInf);
  h.r_b.assign(frames_, kNegInf);
  if (g.last < 0) h.r_n[0] = lp(0, c);
  double psi = h.r_n[0];
  for (int t = 1; t < frames_; ++t) {
    const double phi = c == g.last ? g.r_b[t - 1] : LogAdd(g.r_b[t - 1], g.r_n[t - 1]);
    h.r_n[t] = LogAdd(h.r_n[t - 1], phi) + lp(t, c);
    h.r_b[t] = LogAdd(h.r_b[t - 1], h.r_n[t - 1]) + lp(t, blank_);
    psi = LogAdd(psi, phi + lp(t, c));
  }
  h.prefix = psi;
  return h;
}

double CtcPrefixScorer::Final(const State& s) const {
  return LogAdd(s.r_n[frames_ - 1], s.r_b[frames_ - 1]);
}

}  // namespace dualasr
