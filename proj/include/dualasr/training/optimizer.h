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


#ifndef DUALASR_TRAINING_OPTIMIZER_H_
#define DUALASR_TRAINING_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualasr/transformer/model.h"

namespace dualasr {

// peak * min(step / warmup, sqrt(warmup / step)); equals `peak` at
// step == warmup. Throws std::invalid_argument for step < 1 or warmup < 1.
double LearningRate(int64_t step, int64_t warmup, double peak);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

// One bias-corrected Adam update of `w` in place; `step` counts from 1.
void AdamUpdate(std::span<double> w, std::span<const double> g, AdamMoments& moments,
                int64_t step, double lr, const AdamConfig& config);

// Adam with bias correction. Parameters without a gradient and frozen
// parameters are left alone.
class Adam {
 public:
  explicit Adam(AdamConfig config = AdamConfig()) : config_(config) {}

  // Returns false, without touching parameters or moments, when any
  // gradient is non-finite.
  bool Step(DualDecoderModel<double>& model, double lr);

  const AdamConfig& config() const { return config_; }
  int64_t steps() const { return steps_; }
  const std::map<std::string, AdamMoments>& moments() const { return moments_; }
  void Restore(int64_t steps, std::map<std::string, AdamMoments> moments) {
    steps_ = steps;
    moments_ = std::move(moments);
  }

 private:
  AdamConfig config_;
  int64_t steps_ = 0;
  std::map<std::string, AdamMoments> moments_;
};

// Drops every gradient buffer, so parameters outside the next graph stay
// without a gradient.
void ZeroGradients(DualDecoderModel<double>& model);

}  // namespace dualasr

#endif  // DUALASR_TRAINING_OPTIMIZER_H_
