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

#ifndef DUALASR_CORPUS_CORPUS_H_
#define DUALASR_CORPUS_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dualasr/corpus/features.h"
#include "dualasr/corpus/lexicon.h"

namespace dualasr {

enum class Task { kVerbatim, kSubtitled, kParallel };

const char* TaskName(Task task);
// Accepts "verbatim", "subtitled" and "parallel".
Task ParseTask(const std::string& name);

// One manifest line. `provenance` is "-" for human labels, otherwise
// "pseudo-verbatim" or "pseudo-subtitle".
struct ManifestEntry {
  std::string id;
  std::string feature_path;
  Task task = Task::kVerbatim;
  std::string verbatim;
  std::string subtitle;
  std::string provenance = "-";

  bool operator==(const ManifestEntry&) const = default;
};

// Reads `id \t feature_path \t task \t verbatim \t subtitle [\t provenance]`.
// Relative feature paths are resolved against the manifest directory.
// Throws std::runtime_error on malformed lines or task/field mismatches.
std::vector<ManifestEntry> ReadManifest(const std::string& path);
// Writes feature paths relative to the manifest directory where possible.
void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries);

struct CorpusConfig {
  int lexicon_words = 40;
  int verbatim_train = 1600;
  int subtitle_train = 1600;
  int clean_dev = 150;
  int spont_annot = 200;
  int min_words = 3;
  int max_words = 6;
  int feat_dim = 16;
  int dur_min = 2;
  int dur_max = 4;
  int spont_dur_min = 2;
  int spont_dur_max = 3;
  double noise = 0.4;
  double spont_noise = 0.6;
  double channel = 0.9;
  double spont_fraction = 0.05;  // of verbatim-train
  double p_filler = 0.2;
  double p_repeat = 0.1;
  double p_variant = 0.6;
  double p_compress = 0.1;
  int jitter = 3;

  // Throws std::invalid_argument on out-of-range values.
  void Validate() const;
};

struct CorpusUtterance {
  ManifestEntry entry;
  Features features;
};

// Split names in generation order.
inline const std::vector<std::string>& SplitNames() {
  static const std::vector<std::string> kNames = {"verbatim-train", "subtitle-train",
                                                  "clean-dev", "spont-annot"};
  return kNames;
}

struct SyntheticCorpus {
  Lexicon lexicon;
  std::map<std::string, std::vector<CorpusUtterance>> splits;
};

// Pure function of (config, seed).
//   verbatim-train  verbatim labels, mostly clean speech
//   subtitle-train  edited subtitle labels over spontaneous speech, with
//                   segment boundaries jittered by up to +-jitter frames
//   clean-dev       verbatim labels, clean speech
//   spont-annot     spontaneous speech with both the verbatim transcript
//                   and its subtitle edit (task parallel)
SyntheticCorpus GenerateCorpus(const CorpusConfig& config, uint64_t seed);

// Writes `<split>.tsv` manifests and `feats/<id>.f32` under `dir`.
void WriteCorpus(const SyntheticCorpus& corpus, const std::string& dir);

// Acoustic unit ids of a spoken word sequence: letters, apostrophe and a
// silence unit around every word.
std::vector<int> AcousticUnits(const std::vector<std::string>& words);
inline constexpr int kNumAcousticUnits = 28;
inline constexpr int kSilenceUnit = 27;

}  // namespace dualasr

#endif  // DUALASR_CORPUS_CORPUS_H_
