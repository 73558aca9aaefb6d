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


#include "dualasr/cli/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "dualasr/cli/errors.h"
#include "dualasr/corpus/batching.h"
#include "dualasr/decoding/search.h"
#include "glog/logging.h"

namespace dualasr {
namespace fs = std::filesystem;

namespace {

constexpr const char* kCleanDev = "clean-dev";
constexpr const char* kSpontAnnot = "spont-annot";

void RequireFile(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) {
    throw CliError(ErrorCategory::kMissingArtifact, path + " not found; " + hint);
  }
}

void RequireKey(const std::string& value, const std::string& key) {
  if (value.empty()) throw CliError(ErrorCategory::kConfig, "key '" + key + "' must be set");
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(ErrorCategory::kIo, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteText(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) throw CliError(ErrorCategory::kIo, "cannot write " + path);
  }
  fs::rename(tmp, path);
}

std::string HypPath(const std::string& run_dir, const std::string& split, const char* stream) {
  return run_dir + "/hyps/" + split + "." + stream + ".txt";
}

std::vector<ManifestEntry> Head(std::vector<ManifestEntry> entries, int limit) {
  if (limit > 0 && static_cast<int>(entries.size()) > limit) entries.resize(limit);
  return entries;
}

// Stage bookkeeping of a run directory.
class Stages {
 public:
  explicit Stages(std::string run_dir) : dir_(std::move(run_dir) + "/stages") {
    fs::create_directories(dir_);
  }
  bool Done(const std::string& stage) const { return fs::exists(Marker(stage)); }
  void Complete(const std::string& stage) const { WriteText(Marker(stage), stage + "\n"); }

 private:
  std::string Marker(const std::string& stage) const { return dir_ + "/" + stage + ".done"; }
  std::string dir_;
};

}  // namespace

std::string SplitManifestPath(const std::string& corpus_dir, const std::string& split) {
  return corpus_dir + "/" + split + ".tsv";
}

std::vector<ManifestEntry> ReadSplit(const std::string& corpus_dir, const std::string& split) {
  const std::string path = SplitManifestPath(corpus_dir, split);
  RequireFile(path, "run `dualasr gen-corpus --corpus_dir " + corpus_dir + "` first");
  return ReadManifest(path);
}

void GenerateCorpusStage(const RunConfig& config) {
  RequireKey(config.corpus_dir, "corpus_dir");
  config.corpus.Validate();
  LOG(INFO) << "generating corpus (seed " << config.corpus_seed << ") in " << config.corpus_dir;
  WriteCorpus(GenerateCorpus(config.corpus, config.corpus_seed), config.corpus_dir);
}

Vocabulary TrainBpeStage(const RunConfig& config) {
  RequireKey(config.corpus_dir, "corpus_dir");
  RequireKey(config.vocab, "vocab");
  std::vector<std::string> verbatim, subtitle;
  for (const auto& e : ReadSplit(config.corpus_dir, "verbatim-train")) {
    if (!e.verbatim.empty()) verbatim.push_back(e.verbatim);
  }
  for (const auto& e : ReadSplit(config.corpus_dir, "subtitle-train")) {
    if (!e.subtitle.empty()) subtitle.push_back(e.subtitle);
  }
  Vocabulary vocab = Vocabulary::TrainBpe(verbatim, subtitle, config.bpe_vocab_size);
  const fs::path parent = fs::path(config.vocab).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  vocab.Save(config.vocab);
  LOG(INFO) << "vocabulary of " << vocab.size() << " tokens written to " << config.vocab;
  return vocab;
}

Vocabulary LoadVocabulary(const std::string& path) {
  RequireFile(path, "run `dualasr train-bpe --vocab " + path + "` first");
  return Vocabulary::Load(path);
}

Model LoadModel(const std::string& checkpoint_path) {
  RequireFile(checkpoint_path, "train or average a model first");
  return ModelFromCheckpoint(LoadCheckpoint(checkpoint_path));
}

std::vector<Utterance> LoadManifestUtterances(const std::vector<std::string>& manifests,
                                              const Vocabulary& vocab) {
  std::vector<Utterance> out;
  for (const auto& path : manifests) {
    RequireFile(path, "check the manifest path");
    auto part = LoadUtterances(ReadManifest(path), vocab);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

ModelConfig EffectiveModelConfig(const RunConfig& config, const Vocabulary& vocab) {
  ModelConfig m = config.model;
  m.vocab_size = vocab.size();
  m.feat_dim = config.corpus.feat_dim;
  m.cross_mode = CrossMode::kNone;
  return m;
}

TrainResult TrainStage(Model& model, std::span<const Utterance> train,
                       std::span<const Utterance> dev, const TrainConfig& config,
                       const std::string& out_dir, bool cross) {
  fs::create_directories(out_dir);
  for (const auto& old : EpochCheckpoints(out_dir)) fs::remove(old);
  std::ofstream log(out_dir + "/train.log", std::ios::trunc);
  if (!log) throw CliError(ErrorCategory::kIo, "cannot write " + out_dir + "/train.log");
  log << "step\tlr\tL_tot\tL_att,asr\tL_ctc\tL_att,subs\n";
  const TrainResult result = cross ? FinetuneCross(model, train, dev, config, out_dir, &log)
                                   : Train(model, train, dev, config, out_dir, &log);
  WriteEpochTable(out_dir + "/epochs.tsv", result);
  if (!result.dropped_ctc.empty()) {
    LOG(WARNING) << result.dropped_ctc.size()
                 << " utterances too short for their CTC target were left out of the CTC loss";
  }
  return result;
}

void WriteEpochTable(const std::string& path, const TrainResult& result) {
  std::string text = "epoch\tsteps\ttrain_loss\tdev_accuracy\tdev_loss\n";
  char line[160];
  for (const auto& e : result.epochs) {
    std::snprintf(line, sizeof(line), "%d\t%lld\t%.17g\t%.17g\t%.17g\n", e.epoch,
                  static_cast<long long>(e.steps), e.metrics.train_loss, e.metrics.asr_accuracy,
                  e.metrics.asr_loss);
    text += line;
  }
  if (result.diverged) text += "# diverged: " + result.divergence_reason + "\n";
  WriteText(path, text);
}

std::vector<EpochSummary> ReadEpochTable(const std::string& path) {
  RequireFile(path, "train a model first");
  std::istringstream in(ReadText(path));
  std::string line;
  std::vector<EpochSummary> out;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    EpochSummary e;
    long long steps = 0;
    if (std::sscanf(line.c_str(), "%d\t%lld\t%lf\t%lf\t%lf", &e.epoch, &steps,
                    &e.metrics.train_loss, &e.metrics.asr_accuracy, &e.metrics.asr_loss) != 5) {
      throw CliError(ErrorCategory::kData, path + ": malformed line '" + line + "'");
    }
    e.steps = steps;
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> EpochCheckpoints(const std::string& dir) {
  std::vector<std::pair<int, std::string>> found;
  if (!fs::is_directory(dir)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    int n = 0;
    char tail = 0;
    if (std::sscanf(name.c_str(), "epoch-%d.ckp%c", &n, &tail) == 2 && tail == 't' &&
        name == "epoch-" + std::to_string(n) + ".ckpt") {
      found.emplace_back(n, entry.path().string());
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> paths;
  for (auto& [n, p] : found) paths.push_back(p);
  return paths;
}

Checkpoint AverageTopK(const std::vector<std::string>& paths, int k) {
  if (paths.empty()) throw CliError(ErrorCategory::kMissingArtifact, "no checkpoints to average");
  std::vector<Checkpoint> all;
  for (const auto& p : paths) {
    RequireFile(p, "check the checkpoint list");
    all.push_back(LoadCheckpoint(p));
  }
  std::vector<Checkpoint> chosen;
  for (size_t i : SelectTopK(all, k)) {
    LOG(INFO) << "averaging epoch " << all[i].epoch << " (dev accuracy "
              << all[i].metrics.asr_accuracy << ")";
    chosen.push_back(std::move(all[i]));
  }
  return AverageCheckpoints(chosen);
}

std::vector<UtteranceHypotheses> DecodeEntries(const Model& model, const Vocabulary& vocab,
                                               const std::vector<ManifestEntry>& entries,
                                               DecoderKind decoder, const SearchOptions& search) {
  std::vector<UtteranceHypotheses> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    const auto enc = model.Encode(NormalizeUtterance(ReadFeatureFile(e.feature_path)));
    UtteranceHypotheses h{e.id, {}};
    for (const auto& hyp : BeamSearch(model, decoder, enc, search)) {
      h.nbest.push_back({hyp.score, vocab.Decode(hyp.tokens)});
    }
    out.push_back(std::move(h));
  }
  return out;
}

std::pair<std::vector<UtteranceHypotheses>, std::vector<UtteranceHypotheses>> DecodeEntriesTuple(
    const Model& model, const Vocabulary& vocab, const std::vector<ManifestEntry>& entries,
    const TupleOptions& options) {
  std::vector<UtteranceHypotheses> asr, sub;
  for (const auto& e : entries) {
    const auto enc = model.Encode(NormalizeUtterance(ReadFeatureFile(e.feature_path)));
    UtteranceHypotheses a{e.id, {}}, s{e.id, {}};
    for (const auto& t : TupleBeamSearch(model, enc, options)) {
      a.nbest.push_back({t.asr.score, vocab.Decode(t.asr.tokens)});
      s.nbest.push_back({t.subtitle.score, vocab.Decode(t.subtitle.tokens)});
    }
    asr.push_back(std::move(a));
    sub.push_back(std::move(s));
  }
  return {std::move(asr), std::move(sub)};
}

EvalReport ScoreHypotheses(const std::vector<ManifestEntry>& entries,
                           const std::vector<UtteranceHypotheses>& hyps, bool subtitle_reference,
                           bool wer, bool bleu) {
  std::map<std::string, const UtteranceHypotheses*> by_id;
  for (const auto& h : hyps) by_id[h.id] = &h;
  std::vector<std::string> refs, outs;
  for (const auto& e : entries) {
    const Task own = subtitle_reference ? Task::kSubtitled : Task::kVerbatim;
    if (e.task != own && e.task != Task::kParallel) continue;
    const std::string& ref = subtitle_reference ? e.subtitle : e.verbatim;
    const auto it = by_id.find(e.id);
    if (it == by_id.end()) throw CliError(ErrorCategory::kData, "no hypothesis for " + e.id);
    refs.push_back(ref);
    outs.push_back(it->second->nbest.empty() ? "" : it->second->nbest.front().text);
  }
  if (refs.empty()) {
    throw CliError(ErrorCategory::kData, std::string("manifest has no ") +
                                             (subtitle_reference ? "subtitle" : "verbatim") +
                                             " references");
  }
  return Evaluate(refs, outs, wer, bleu);
}

const char* RecipeName(Recipe recipe) {
  switch (recipe) {
    case Recipe::kBaselineAsr:
      return "baseline-asr";
    case Recipe::kMultitask:
      return "multitask";
    case Recipe::kMultitaskInit:
      return "multitask-init";
    case Recipe::kCrossFinetune:
      return "cross-finetune";
  }
  return "?";
}

Recipe ParseRecipe(const std::string& name) {
  for (Recipe r : {Recipe::kBaselineAsr, Recipe::kMultitask, Recipe::kMultitaskInit,
                   Recipe::kCrossFinetune}) {
    if (name == RecipeName(r)) return r;
  }
  throw CliError(ErrorCategory::kUsage,
                 "unknown recipe '" + name +
                     "' (baseline-asr, multitask, multitask-init, cross-finetune)");
}

std::string BuildReport(const std::string& run_dir, const std::string& corpus_dir) {
  std::string report;
  const std::string epochs = run_dir + "/train/epochs.tsv";
  if (fs::exists(epochs)) {
    std::istringstream in(ReadText(epochs));
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# diverged: ", 0) == 0) report += "STATUS\tdiverged\t" + line.substr(12) + "\n";
    }
  }
  char line[160];
  for (const char* split : {kCleanDev, kSpontAnnot}) {
    const std::string path = HypPath(run_dir, split, "asr");
    RequireFile(path, "run the decode stage first");
    const auto r = ScoreHypotheses(ReadSplit(corpus_dir, split), ReadHypotheses(path), false,
                                   true, false);
    std::snprintf(line, sizeof(line), "WER\t%s\tasr\t%.2f\n", split, r.wer);
    report += line;
  }
  const std::string sub = HypPath(run_dir, kSpontAnnot, "sub");
  const bool has_sub = fs::exists(sub);
  const auto r = ScoreHypotheses(ReadSplit(corpus_dir, kSpontAnnot),
                                 ReadHypotheses(has_sub ? sub : HypPath(run_dir, kSpontAnnot, "asr")),
                                 true, false, true);
  std::snprintf(line, sizeof(line), "BLEU\t%s\t%s\t%.2f\n", kSpontAnnot, has_sub ? "sub" : "asr",
                100.0 * r.bleu.bleu);
  report += line;
  return report;
}

void RunExperiment(Recipe recipe, const RunConfig& config) {
  config.Validate();
  RequireKey(config.run_dir, "run_dir");
  RequireKey(config.corpus_dir, "corpus_dir");
  RequireKey(config.vocab, "vocab");
  for (const auto& split : SplitNames()) {
    RequireFile(SplitManifestPath(config.corpus_dir, split),
                "run `dualasr gen-corpus --corpus_dir " + config.corpus_dir + "` first");
  }
  const Vocabulary vocab = LoadVocabulary(config.vocab);
  const std::string& run = config.run_dir;
  fs::create_directories(run + "/hyps");

  const std::string effective = "recipe=" + std::string(RecipeName(recipe)) + "\n" +
                                config.Serialize();
  const std::string echo = run + "/config.txt";
  if (fs::exists(echo) && ReadText(echo) != effective) {
    throw CliError(ErrorCategory::kConfig,
                   run + " holds a run with a different configuration; use a new run_dir");
  }
  WriteText(echo, effective);
  const Stages stages(run);
  const bool is_cross = recipe == Recipe::kCrossFinetune;

  // Training data of the recipe; cross-finetune labels it first.
  std::vector<std::string> train_manifests;
  if (is_cross) {
    RequireKey(config.base_ckpt, "base_ckpt");
    std::string pseudo = config.pseudo_manifest;
    if (pseudo.empty()) {
      pseudo = run + "/pseudo.tsv";
      if (!stages.Done("pseudo-label")) {
        const Model base = LoadModel(config.base_ckpt);
        std::vector<ManifestEntry> entries =
            Head(ReadSplit(config.corpus_dir, "verbatim-train"), config.pseudo_limit);
        const auto subs = Head(ReadSplit(config.corpus_dir, "subtitle-train"), config.pseudo_limit);
        entries.insert(entries.end(), subs.begin(), subs.end());
        LOG(INFO) << "pseudo-labeling " << entries.size() << " utterances";
        const auto result = PseudoLabel(base, vocab, entries, config.pseudo_target, config.search);
        LOG(INFO) << result.entries.size() << " labeled, " << result.skipped.size() << " skipped";
        WriteManifest(pseudo, result.entries);
        stages.Complete("pseudo-label");
      }
    } else {
      RequireFile(pseudo, "check pseudo_manifest");
    }
    train_manifests.push_back(pseudo);
  } else {
    train_manifests.push_back(SplitManifestPath(config.corpus_dir, "verbatim-train"));
    if (recipe != Recipe::kBaselineAsr) {
      train_manifests.push_back(SplitManifestPath(config.corpus_dir, "subtitle-train"));
    }
  }

  if (!stages.Done("train")) {
    TrainConfig tc = config.train;
    std::optional<Model> model;
    switch (recipe) {
      case Recipe::kBaselineAsr:
        tc.weights.asr = 1.0;
        tc.weights.subs = 0.0;
        tc.mixing = Mixing::kVerbatimOnly;
        model.emplace(EffectiveModelConfig(config, vocab), tc.seed);
        break;
      case Recipe::kMultitask:
        model.emplace(EffectiveModelConfig(config, vocab), tc.seed);
        break;
      case Recipe::kMultitaskInit: {
        RequireKey(config.init_ckpt, "init_ckpt");
        const Model asr = LoadModel(config.init_ckpt);
        model.emplace(EffectiveModelConfig(config, vocab), tc.seed);
        model->InitializeFrom(asr, config.init_subtitle_from_asr);
        tc.peak_lr *= config.init_lr_scale;
        break;
      }
      case Recipe::kCrossFinetune: {
        const Model base = LoadModel(config.base_ckpt);
        model.emplace(BuildCrossModel(base, config.cross_mode, tc.seed));
        tc.freeze_encoder = config.cross_freeze_encoder;
        tc.peak_lr *= config.init_lr_scale;
        break;
      }
    }
    if (model->config().vocab_size != vocab.size()) {
      throw CliError(ErrorCategory::kConfig, "checkpoint vocabulary size " +
                                                 std::to_string(model->config().vocab_size) +
                                                 " does not match " + config.vocab);
    }
    const auto train = LoadManifestUtterances(train_manifests, vocab);
    const auto dev =
        LoadManifestUtterances({SplitManifestPath(config.corpus_dir, kCleanDev)}, vocab);
    LOG(INFO) << RecipeName(recipe) << ": training on " << train.size() << " utterances";
    const TrainResult result = TrainStage(*model, train, dev, tc, run + "/train", is_cross);
    if (result.epochs.empty()) {
      throw CliError(ErrorCategory::kNumeric, "training diverged before the first checkpoint: " +
                                                  result.divergence_reason);
    }
    stages.Complete("train");
  }

  const std::string model_path = run + "/model.ckpt";
  if (!stages.Done("average")) {
    SaveCheckpoint(AverageTopK(EpochCheckpoints(run + "/train"), config.average_top_k),
                   model_path);
    stages.Complete("average");
  }

  if (!stages.Done("decode")) {
    const Model model = LoadModel(model_path);
    for (const char* split : {kCleanDev, kSpontAnnot}) {
      const auto entries = ReadSplit(config.corpus_dir, split);
      LOG(INFO) << "decoding " << split;
      if (is_cross) {
        const auto [asr, sub] = DecodeEntriesTuple(model, vocab, entries,
                                                   config.EffectiveTupleOptions());
        WriteHypotheses(HypPath(run, split, "asr"), asr);
        if (std::string(split) == kSpontAnnot) WriteHypotheses(HypPath(run, split, "sub"), sub);
        continue;
      }
      WriteHypotheses(HypPath(run, split, "asr"),
                      DecodeEntries(model, vocab, entries, DecoderKind::kAsr, config.search));
      if (recipe != Recipe::kBaselineAsr && std::string(split) == kSpontAnnot) {
        WriteHypotheses(HypPath(run, split, "sub"),
                        DecodeEntries(model, vocab, entries, DecoderKind::kSubtitle,
                                      config.search));
      }
    }
    stages.Complete("decode");
  }

  const std::string report = BuildReport(run, config.corpus_dir);
  WriteText(run + "/report.txt", report);
  stages.Complete("report");
  LOG(INFO) << RecipeName(recipe) << " report:\n" << report;
}

}  // namespace dualasr
