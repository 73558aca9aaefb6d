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


#ifndef DUALASR_CLI_RUN_CONFIG_H_
#define DUALASR_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dualasr/corpus/corpus.h"
#include "dualasr/decoding/search.h"
#include "dualasr/training/trainer.h"
#include "dualasr/transformer/model.h"

namespace dualasr {

// Flat `key=value` configuration shared by every subcommand. Keys are
// grouped by prefix (corpus., bpe., model., train., init., cross., pseudo.,
// decode., average.) plus a few path keys. Every key is also a command-line
// flag `--<key>`.
struct RunConfig {
  // Paths.
  std::string corpus_dir;
  std::string vocab;
  std::string run_dir;
  std::string init_ckpt;        // multitask-init: trained ASR model
  std::string base_ckpt;        // cross-finetune: independent multitask model
  std::string pseudo_manifest;  // cross-finetune: reuse these pseudo labels

  uint64_t corpus_seed = 1;
  CorpusConfig corpus;
  int bpe_vocab_size = 200;
  ModelConfig model;  // vocab_size and feat_dim come from the vocabulary and corpus
  TrainConfig train;
  double init_lr_scale = 0.1;
  bool init_subtitle_from_asr = true;
  CrossMode cross_mode = CrossMode::kConcat;
  bool cross_freeze_encoder = false;
  PseudoLabelTarget pseudo_target = PseudoLabelTarget::kBoth;
  int pseudo_limit = 0;  // per split, 0 means all
  SearchOptions search;
  TupleOptions tuple;  // beam, ctc_weight and length ratio follow `search`
  int average_top_k = 3;

  // Every key in a stable order.
  static const std::vector<std::string>& Keys();
  static std::string Help(const std::string& key);

  // Throws CliError(kConfig) for unknown keys and unparsable values.
  void Set(const std::string& key, const std::string& value);
  std::string Get(const std::string& key) const;

  // `key=value` lines; blank lines and lines starting with '#' are skipped.
  void MergeText(const std::string& text, const std::string& origin = "<text>");
  void MergeFile(const std::string& path);
  // All keys, one `key=value` per line, in Keys() order.
  std::string Serialize() const;

  // Range checks of every section; throws CliError(kConfig).
  void Validate() const;

  TupleOptions EffectiveTupleOptions() const;
};

}  // namespace dualasr

#endif  // DUALASR_CLI_RUN_CONFIG_H_
