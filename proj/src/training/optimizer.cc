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


#include "dualasr/training/optimizer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glog/logging.h"

namespace dualasr {

double LearningRate(int64_t step, int64_t warmup, double peak) {
  if (step < 1) throw std::invalid_argument("learning-rate step must be >= 1");
  if (warmup < 1) throw std::invalid_argument("warmup must be >= 1");
  const double s = static_cast<double>(step), w = static_cast<double>(warmup);
  return peak * std::min(s / w, std::sqrt(w / s));
}

void ZeroGradients(DualDecoderModel<double>& model) {
  for (const auto& [name, p] : model.parameters()) model.Param(name).ClearGrad();
}

void AdamUpdate(std::span<double> w, std::span<const double> g, AdamMoments& mom, int64_t step,
                double lr, const AdamConfig& config) {
  if (mom.m.empty()) {
    mom.m.assign(g.size(), 0.0);
    mom.v.assign(g.size(), 0.0);
  }
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (size_t i = 0; i < g.size(); ++i) {
    mom.m[i] = config.beta1 * mom.m[i] + (1.0 - config.beta1) * g[i];
    mom.v[i] = config.beta2 * mom.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    w[i] -= lr * (mom.m[i] / c1) / (std::sqrt(mom.v[i] / c2) + config.eps);
  }
}

bool Adam::Step(DualDecoderModel<double>& model, double lr) {
  for (const auto& [name, p] : model.parameters()) {
    if (!p.has_grad() || model.IsFrozen(name)) continue;
    for (double g : p.grad()) {
      if (!std::isfinite(g)) {
        LOG(WARNING) << "non-finite gradient in " << name << "; optimizer step skipped";
        return false;
      }
    }
  }
  ++steps_;
  for (const auto& [name, p] : model.parameters()) {
    if (!p.has_grad() || model.IsFrozen(name)) continue;
    AdamUpdate(model.Param(name).mutable_data(), p.grad(), moments_[name], steps_, lr, config_);
  }
  return true;
}

}  // namespace dualasr
