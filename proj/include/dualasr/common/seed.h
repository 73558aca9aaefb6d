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

#ifndef DUALASR_COMMON_SEED_H_
#define DUALASR_COMMON_SEED_H_

#include <cstdint>
#include <initializer_list>

namespace dualasr {

// SplitMix64 finalizer.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of keys,
// e.g. DeriveSeed(seed, {split, index}).
inline uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> keys) {
  uint64_t s = MixSeed(base);
  for (uint64_t k : keys) s = MixSeed(s ^ MixSeed(k + 0x632BE59BD9B4E019ULL));
  return s;
}

}  // namespace dualasr

#endif  // DUALASR_COMMON_SEED_H_
