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

#include "dualasr/corpus/features.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dualasr {

namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files are written in host order");

std::vector<double> ColumnMeans(const Features& x) {
  std::vector<double> mean(x.dim, 0.0);
  for (int t = 0; t < x.frames; ++t) {
    for (int k = 0; k < x.dim; ++k) mean[k] += x.at(t, k);
  }
  for (double& m : mean) m /= std::max(1, x.frames);
  return mean;
}

}  // namespace

Features MakePrototypes(int units, int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Features p(units, dim);
  for (double& v : p.data) v = normal(rng);
  return p;
}

Features SynthesizeFeatures(std::span<const int> units, const Features& prototypes,
                            int dur_min, int dur_max, double noise,
                            std::mt19937_64& rng) {
  if (dur_min < 1 || dur_max < dur_min) {
    throw std::invalid_argument("invalid duration range");
  }
  std::uniform_int_distribution<int> duration(dur_min, dur_max);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<int> rows;
  for (int u : units) {
    if (u < 0 || u >= prototypes.frames) throw std::out_of_range("unknown acoustic unit");
    const int d = duration(rng);
    for (int i = 0; i < d; ++i) rows.push_back(u);
  }
  Features x(static_cast<int>(rows.size()), prototypes.dim);
  for (int t = 0; t < x.frames; ++t) {
    for (int k = 0; k < x.dim; ++k) {
      x.at(t, k) = prototypes.at(rows[t], k) + (noise > 0.0 ? noise * normal(rng) : 0.0);
    }
  }
  return x;
}

Features NormalizeUtterance(const Features& x, double floor) {
  if (x.frames < 1) throw std::invalid_argument("cannot normalize an empty utterance");
  const std::vector<double> mean = ColumnMeans(x);
  std::vector<double> var(x.dim, 0.0);
  for (int t = 0; t < x.frames; ++t) {
    for (int k = 0; k < x.dim; ++k) {
      const double d = x.at(t, k) - mean[k];
      var[k] += d * d;
    }
  }
  Features y(x.frames, x.dim);
  for (int k = 0; k < x.dim; ++k) {
    var[k] /= x.frames;
    const double scale = var[k] < floor ? 0.0 : 1.0 / std::sqrt(var[k]);
    for (int t = 0; t < x.frames; ++t) y.at(t, k) = (x.at(t, k) - mean[k]) * scale;
  }
  return y;
}

Features SpecAugment(const Features& x, const SpecAugmentConfig& config,
                     std::mt19937_64& rng) {
  if (config.time_masks > 0 && config.max_time_width > x.frames) {
    throw std::invalid_argument("time mask wider than the utterance");
  }
  if (config.freq_masks > 0 && config.max_freq_width > x.dim) {
    throw std::invalid_argument("frequency mask wider than the feature dimension");
  }
  Features y = x;
  if (config.time_masks <= 0 && config.freq_masks <= 0) return y;
  const std::vector<double> mean = ColumnMeans(x);
  for (int m = 0; m < config.time_masks; ++m) {
    const int w = std::uniform_int_distribution<int>(0, config.max_time_width)(rng);
    const int start = std::uniform_int_distribution<int>(0, x.frames - w)(rng);
    for (int t = start; t < start + w; ++t) {
      for (int k = 0; k < x.dim; ++k) y.at(t, k) = mean[k];
    }
  }
  for (int m = 0; m < config.freq_masks; ++m) {
    const int w = std::uniform_int_distribution<int>(0, config.max_freq_width)(rng);
    const int start = std::uniform_int_distribution<int>(0, x.dim - w)(rng);
    for (int k = start; k < start + w; ++k) {
      for (int t = 0; t < x.frames; ++t) y.at(t, k) = mean[k];
    }
  }
  return y;
}

void WriteFeatureFile(const std::string& path, const Features& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature file " + path);
  const uint32_t header[2] = {static_cast<uint32_t>(x.frames),
                              static_cast<uint32_t>(x.dim)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  std::vector<float> values(x.data.begin(), x.data.end());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to " + path);
}

Features ReadFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file " + path);
  uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] == 0 || header[1] == 0 || header[0] > (1u << 24) ||
      header[1] > 4096) {
    throw std::runtime_error("bad feature header in " + path);
  }
  Features x(static_cast<int>(header[0]), static_cast<int>(header[1]));
  std::vector<float> values(x.data.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in) throw std::runtime_error("truncated feature file " + path);
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::runtime_error("non-finite feature in " + path);
    x.data[i] = values[i];
  }
  return x;
}

}  // namespace dualasr
