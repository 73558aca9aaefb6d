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


// Command-line entry point: corpus generation, tokenizer training, training,
// decoding, evaluation, pseudo-labeling, cross finetuning, checkpoint
// averaging and end-to-end experiment recipes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualasr/cli/errors.h"
#include "dualasr/cli/pipeline.h"
#include "dualasr/cli/run_config.h"
#include "glog/logging.h"

namespace dualasr {
namespace {

namespace fs = std::filesystem;

// `--config FILE` plus one `--<key>` flag per configuration key.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void Register(CLI::App* app) {
    app->add_option("--config", file, "key=value configuration file");
    for (const auto& key : RunConfig::Keys()) {
      app->add_option("--" + key, values[key], RunConfig::Help(key))->group("Configuration");
    }
  }

  RunConfig Resolve(const CLI::App* app) const {
    RunConfig config;
    if (!file.empty()) config.MergeFile(file);
    for (const auto& key : RunConfig::Keys()) {
      if (app->count("--" + key) > 0) config.Set(key, values.at(key));
    }
    return config;
  }
};

void EchoConfig(const RunConfig& config, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir + "/config.txt", std::ios::trunc);
  out << config.Serialize();
  if (!out) throw CliError(ErrorCategory::kIo, "cannot write " + dir + "/config.txt");
}

DecoderKind ParseDecoder(const std::string& name) {
  if (name == "asr") return DecoderKind::kAsr;
  if (name == "sub") return DecoderKind::kSubtitle;
  throw CliError(ErrorCategory::kUsage, "unknown decoder '" + name + "'");
}

int Main(int argc, char** argv) {
  CLI::App app{"dual-decoder speech recognition and subtitling"};
  app.require_subcommand(1);
  std::map<std::string, ConfigFlags> flags;

  auto* gen = app.add_subcommand("gen-corpus", "write the synthetic corpus to corpus_dir");
  flags["gen-corpus"].Register(gen);

  auto* bpe = app.add_subcommand("train-bpe", "train the subword vocabulary on the training texts");
  flags["train-bpe"].Register(bpe);

  auto* train = app.add_subcommand("train", "masked multitask training");
  std::vector<std::string> train_manifests;
  std::string dev_manifest, train_out;
  train->add_option("--train-manifest", train_manifests, "training manifests")->required();
  train->add_option("--dev-manifest", dev_manifest, "validation manifest")->required();
  train->add_option("--out", train_out, "output directory")->required();
  flags["train"].Register(train);

  auto* decode = app.add_subcommand("decode", "beam search over a manifest");
  std::string decode_ckpt, decode_manifest, decode_decoder = "asr", decode_out;
  int beam = -1;
  double ctc_weight = -1.0;
  decode->add_option("--ckpt", decode_ckpt, "model checkpoint")->required();
  decode->add_option("--manifest", decode_manifest, "utterances to decode")->required();
  decode->add_option("--decoder", decode_decoder, "asr, sub or tuple")
      ->check(CLI::IsMember({"asr", "sub", "tuple"}));
  decode->add_option("--beam", beam, "beam size");
  decode->add_option("--ctc-weight", ctc_weight, "CTC weight of the ASR decoder");
  decode->add_option("--out", decode_out,
                     "hypothesis file; tuple search also writes <out>.sub")->required();
  flags["decode"].Register(decode);

  auto* eval = app.add_subcommand("eval", "score hypotheses or rebuild a run report");
  std::string eval_manifest, eval_hyps, eval_reference = "verbatim";
  eval->add_option("--manifest", eval_manifest, "reference manifest");
  eval->add_option("--hyps", eval_hyps, "hypothesis file");
  eval->add_option("--reference", eval_reference, "verbatim or subtitle")
      ->check(CLI::IsMember({"verbatim", "subtitle"}));
  flags["eval"].Register(eval);

  auto* pseudo = app.add_subcommand("pseudo-label", "fill missing targets by decoding");
  std::string pseudo_ckpt, pseudo_out;
  std::vector<std::string> pseudo_manifests;
  pseudo->add_option("--ckpt", pseudo_ckpt, "independent multitask checkpoint")->required();
  pseudo->add_option("--manifest", pseudo_manifests, "manifests to label")->required();
  pseudo->add_option("--out", pseudo_out, "output manifest")->required();
  flags["pseudo-label"].Register(pseudo);

  auto* cross = app.add_subcommand("finetune-cross", "cross-connected finetuning on parallel data");
  std::string cross_base, cross_train, cross_dev, cross_out;
  cross->add_option("--base", cross_base, "independent multitask checkpoint")->required();
  cross->add_option("--train-manifest", cross_train, "parallel manifest")->required();
  cross->add_option("--dev-manifest", cross_dev, "validation manifest")->required();
  cross->add_option("--out", cross_out, "output directory")->required();
  flags["finetune-cross"].Register(cross);

  auto* avg = app.add_subcommand("average-checkpoints", "average the top-k checkpoints");
  std::vector<std::string> avg_inputs;
  std::string avg_dir, avg_out;
  int top_k = -1;
  avg->add_option("checkpoints", avg_inputs, "checkpoint files");
  avg->add_option("--dir", avg_dir, "use every epoch-N.ckpt in this directory");
  avg->add_option("--top-k", top_k, "number of checkpoints averaged");
  avg->add_option("--out", avg_out, "averaged checkpoint")->required();
  flags["average-checkpoints"].Register(avg);

  auto* exp = app.add_subcommand("run-experiment", "run a recipe end to end");
  std::string recipe_name;
  exp->add_option("recipe", recipe_name, "baseline-asr, multitask, multitask-init, cross-finetune")
      ->required();
  flags["run-experiment"].Register(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    std::cerr << "error[usage]: " << message << "\n";
    return ExitCode(ErrorCategory::kUsage);
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig config = flags.at(sub->get_name()).Resolve(sub);
  config.Validate();

  if (sub == gen) {
    GenerateCorpusStage(config);
  } else if (sub == bpe) {
    TrainBpeStage(config);
  } else if (sub == train) {
    const Vocabulary vocab = LoadVocabulary(config.vocab);
    Model model(EffectiveModelConfig(config, vocab), config.train.seed);
    TrainConfig tc = config.train;
    if (!config.init_ckpt.empty()) {
      model.InitializeFrom(LoadModel(config.init_ckpt), config.init_subtitle_from_asr);
      tc.peak_lr *= config.init_lr_scale;
    }
    EchoConfig(config, train_out);
    const auto result = TrainStage(model, LoadManifestUtterances(train_manifests, vocab),
                                   LoadManifestUtterances({dev_manifest}, vocab), tc, train_out,
                                   false);
    if (result.diverged) throw CliError(ErrorCategory::kNumeric, result.divergence_reason);
  } else if (sub == decode) {
    if (beam > 0) config.search.beam = beam;
    if (ctc_weight >= 0.0) config.search.ctc_weight = ctc_weight;
    config.Validate();
    const Vocabulary vocab = LoadVocabulary(config.vocab);
    const Model model = LoadModel(decode_ckpt);
    const auto entries = ReadManifest(decode_manifest);
    if (decode_decoder == "tuple") {
      const auto [a, s] = DecodeEntriesTuple(model, vocab, entries, config.EffectiveTupleOptions());
      WriteHypotheses(decode_out, a);
      WriteHypotheses(decode_out + ".sub", s);
    } else {
      WriteHypotheses(decode_out, DecodeEntries(model, vocab, entries,
                                                ParseDecoder(decode_decoder), config.search));
    }
  } else if (sub == eval) {
    if (eval_hyps.empty()) {
      if (config.run_dir.empty() || config.corpus_dir.empty()) {
        throw CliError(ErrorCategory::kUsage,
                       "eval needs --hyps and --manifest, or --run_dir and --corpus_dir");
      }
      std::cout << BuildReport(config.run_dir, config.corpus_dir);
    } else {
      if (eval_manifest.empty()) throw CliError(ErrorCategory::kUsage, "--hyps needs --manifest");
      const bool subtitle = eval_reference == "subtitle";
      std::cout << FormatReport(ScoreHypotheses(ReadManifest(eval_manifest),
                                                ReadHypotheses(eval_hyps), subtitle, true, true));
    }
  } else if (sub == pseudo) {
    const Vocabulary vocab = LoadVocabulary(config.vocab);
    const Model model = LoadModel(pseudo_ckpt);
    std::vector<ManifestEntry> entries;
    for (const auto& m : pseudo_manifests) {
      const auto part = ReadManifest(m);
      entries.insert(entries.end(), part.begin(), part.end());
    }
    const auto result = PseudoLabel(model, vocab, entries, config.pseudo_target, config.search);
    LOG(INFO) << result.entries.size() << " labeled, " << result.skipped.size() << " skipped";
    WriteManifest(pseudo_out, result.entries);
  } else if (sub == cross) {
    const Vocabulary vocab = LoadVocabulary(config.vocab);
    Model model = BuildCrossModel(LoadModel(cross_base), config.cross_mode, config.train.seed);
    TrainConfig tc = config.train;
    tc.freeze_encoder = config.cross_freeze_encoder;
    tc.peak_lr *= config.init_lr_scale;
    EchoConfig(config, cross_out);
    const auto result = TrainStage(model, LoadManifestUtterances({cross_train}, vocab),
                                   LoadManifestUtterances({cross_dev}, vocab), tc, cross_out, true);
    if (result.diverged) throw CliError(ErrorCategory::kNumeric, result.divergence_reason);
  } else if (sub == avg) {
    std::vector<std::string> inputs = avg_inputs;
    if (!avg_dir.empty()) {
      const auto found = EpochCheckpoints(avg_dir);
      inputs.insert(inputs.end(), found.begin(), found.end());
    }
    SaveCheckpoint(AverageTopK(inputs, top_k > 0 ? top_k : config.average_top_k), avg_out);
  } else if (sub == exp) {
    RunExperiment(ParseRecipe(recipe_name), config);
  }
  return 0;
}

}  // namespace
}  // namespace dualasr

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  try {
    return dualasr::Main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << dualasr::FormatError(e) << "\n";
    return dualasr::ExitCode(dualasr::Classify(e));
  }
}
