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

#ifndef DUALASR_CORPUS_FEATURES_H_
#define DUALASR_CORPUS_FEATURES_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dualasr {

// Row-major frame matrix [frames x dim].
struct Features {
  int frames = 0;
  int dim = 0;
  std::vector<double> data;

  Features() = default;
  Features(int t, int d) : frames(t), dim(d), data(static_cast<size_t>(t) * d, 0.0) {}

  double& at(int t, int k) { return data[static_cast<size_t>(t) * dim + k]; }
  double at(int t, int k) const { return data[static_cast<size_t>(t) * dim + k]; }
  bool operator==(const Features&) const = default;
};

// Fixed random prototype table [units x dim] with N(0, 1) entries.
Features MakePrototypes(int units, int dim, uint64_t seed);

// Each unit emits between dur_min and dur_max copies of its prototype row
// plus N(0, noise^2) noise.
Features SynthesizeFeatures(std::span<const int> units, const Features& prototypes,
                            int dur_min, int dur_max, double noise,
                            std::mt19937_64& rng);

// Per-dimension mean 0 and variance 1 over the utterance. Columns with
// variance below `floor` become zeros.
Features NormalizeUtterance(const Features& x, double floor = 1e-10);

struct SpecAugmentConfig {
  int time_masks = 2;
  int max_time_width = 5;
  int freq_masks = 2;
  int max_freq_width = 3;
};

// Masks random time and frequency bands. Masked cells take the per-dimension
// utterance mean. Throws std::invalid_argument when a width exceeds its
// dimension.
Features SpecAugment(const Features& x, const SpecAugmentConfig& config,
                     std::mt19937_64& rng);

// Feature file: little-endian uint32 T, uint32 dim, then T*dim float32.
void WriteFeatureFile(const std::string& path, const Features& x);
Features ReadFeatureFile(const std::string& path);

}  // namespace dualasr

#endif  // DUALASR_CORPUS_FEATURES_H_
