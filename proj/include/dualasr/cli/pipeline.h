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


#ifndef DUALASR_CLI_PIPELINE_H_
#define DUALASR_CLI_PIPELINE_H_

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dualasr/cli/run_config.h"
#include "dualasr/corpus/corpus.h"
#include "dualasr/decoding/hypothesis_file.h"
#include "dualasr/metrics/metrics.h"
#include "dualasr/tokenizer/vocabulary.h"
#include "dualasr/training/checkpoint.h"
#include "dualasr/training/trainer.h"

namespace dualasr {

// Stages shared by the subcommands and the experiment recipes. Failures are
// reported as CliError with a category.

// <corpus_dir>/<split>.tsv
std::string SplitManifestPath(const std::string& corpus_dir, const std::string& split);
std::vector<ManifestEntry> ReadSplit(const std::string& corpus_dir, const std::string& split);

// Writes the synthetic corpus of `config.corpus` to `config.corpus_dir`.
void GenerateCorpusStage(const RunConfig& config);

// BPE over the verbatim-train and subtitle-train texts, saved to
// `config.vocab`.
Vocabulary TrainBpeStage(const RunConfig& config);

Vocabulary LoadVocabulary(const std::string& path);
Model LoadModel(const std::string& checkpoint_path);
// Loads the manifests and prints nothing; throws kMissingArtifact.
std::vector<Utterance> LoadManifestUtterances(const std::vector<std::string>& manifests,
                                              const Vocabulary& vocab);

// Fresh independent model sized for `vocab` and the corpus features.
ModelConfig EffectiveModelConfig(const RunConfig& config, const Vocabulary& vocab);

// Runs Train() or FinetuneCross() into `out_dir`: epoch-N.ckpt, train.log
// (one line per step) and epochs.tsv (one line per epoch).
TrainResult TrainStage(Model& model, std::span<const Utterance> train,
                       std::span<const Utterance> dev, const TrainConfig& config,
                       const std::string& out_dir, bool cross);

// `epoch  steps  train_loss  dev_accuracy  dev_loss` lines with a header.
void WriteEpochTable(const std::string& path, const TrainResult& result);
std::vector<EpochSummary> ReadEpochTable(const std::string& path);

// Averages the top-k checkpoints among `paths` by validation accuracy.
Checkpoint AverageTopK(const std::vector<std::string>& paths, int k);
// Every epoch-N.ckpt in `dir`, ordered by N.
std::vector<std::string> EpochCheckpoints(const std::string& dir);

// Beam search over every entry; texts are detokenized.
std::vector<UtteranceHypotheses> DecodeEntries(const Model& model, const Vocabulary& vocab,
                                               const std::vector<ManifestEntry>& entries,
                                               DecoderKind decoder, const SearchOptions& search);
// Tuple search; returns the ASR and subtitle streams.
std::pair<std::vector<UtteranceHypotheses>, std::vector<UtteranceHypotheses>> DecodeEntriesTuple(
    const Model& model, const Vocabulary& vocab, const std::vector<ManifestEntry>& entries,
    const TupleOptions& options);

// Scores the 1-best of `hyps` against the verbatim or subtitle field of the
// matching manifest entries. Throws kData when an id has no hypothesis.
EvalReport ScoreHypotheses(const std::vector<ManifestEntry>& entries,
                           const std::vector<UtteranceHypotheses>& hyps, bool subtitle_reference,
                           bool wer, bool bleu);

enum class Recipe { kBaselineAsr, kMultitask, kMultitaskInit, kCrossFinetune };
const char* RecipeName(Recipe recipe);
Recipe ParseRecipe(const std::string& name);

// Report of a run directory, computed from <run_dir>/hyps only:
//   WER   clean-dev    asr  x.xx
//   WER   spont-annot  asr  x.xx
//   BLEU  spont-annot  sub  x.xx   (asr when no subtitle decoder was trained)
// preceded by a status line for diverged runs.
std::string BuildReport(const std::string& run_dir, const std::string& corpus_dir);

// Executes a recipe in `config.run_dir`. Completed stages leave a marker in
// <run_dir>/stages and are skipped when the recipe is run again with the same
// configuration. Requires the corpus and vocabulary to exist.
void RunExperiment(Recipe recipe, const RunConfig& config);

}  // namespace dualasr

#endif  // DUALASR_CLI_PIPELINE_H_
