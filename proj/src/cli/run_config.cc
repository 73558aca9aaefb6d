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


#include "dualasr/cli/run_config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "dualasr/cli/errors.h"

namespace dualasr {
namespace {

CliError BadValue(const std::string& key, const std::string& value, const char* expected) {
  return CliError(ErrorCategory::kConfig,
                  "key '" + key + "': cannot parse '" + value + "' as " + expected);
}

template <typename Int>
Int ParseInteger(const std::string& key, const std::string& value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw BadValue(key, value, "an integer");
  }
  return out;
}

double ParseDouble(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw BadValue(key, value, "a number");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw BadValue(key, value, "a boolean (true/false)");
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename E, typename Parse>
E ParseEnum(const std::string& key, const std::string& value, Parse parse, const char* expected) {
  try {
    return parse(value);
  } catch (const std::invalid_argument&) {
    throw BadValue(key, value, expected);
  }
}

struct Field {
  std::string key;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Ref>
Field Str(std::string key, std::string help, Ref ref) {
  return {key, std::move(help),
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = v; }};
}

template <typename Ref>
Field Int(std::string key, std::string help, Ref ref) {
  return {key, std::move(help),
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v) {
            ref(c) = ParseInteger<std::remove_reference_t<decltype(ref(c))>>(key, v);
          }};
}

template <typename Ref>
Field Real(std::string key, std::string help, Ref ref) {
  return {key, std::move(help),
          [ref](const RunConfig& c) { return FormatDouble(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = ParseDouble(key, v); }};
}

template <typename Ref>
Field Flag(std::string key, std::string help, Ref ref) {
  return {key, std::move(help),
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = ParseBool(key, v); }};
}

#define DUALASR_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& Fields() {
  static const std::vector<Field> kFields = {
      Str("corpus_dir", "corpus directory (split manifests and features)", DUALASR_REF(corpus_dir)),
      Str("vocab", "vocabulary file", DUALASR_REF(vocab)),
      Str("run_dir", "output directory of a run", DUALASR_REF(run_dir)),
      Str("init_ckpt", "ASR checkpoint initializing multitask-init", DUALASR_REF(init_ckpt)),
      Str("base_ckpt", "independent multitask checkpoint for cross-finetune",
          DUALASR_REF(base_ckpt)),
      Str("pseudo_manifest", "existing pseudo-label manifest for cross-finetune",
          DUALASR_REF(pseudo_manifest)),

      Int("corpus.seed", "corpus generation seed", DUALASR_REF(corpus_seed)),
      Int("corpus.lexicon_words", "content words in the lexicon", DUALASR_REF(corpus.lexicon_words)),
      Int("corpus.verbatim_train", "verbatim-train utterances", DUALASR_REF(corpus.verbatim_train)),
      Int("corpus.subtitle_train", "subtitle-train utterances", DUALASR_REF(corpus.subtitle_train)),
      Int("corpus.clean_dev", "clean-dev utterances", DUALASR_REF(corpus.clean_dev)),
      Int("corpus.spont_annot", "spont-annot utterances", DUALASR_REF(corpus.spont_annot)),
      Int("corpus.min_words", "minimum sentence length", DUALASR_REF(corpus.min_words)),
      Int("corpus.max_words", "maximum sentence length", DUALASR_REF(corpus.max_words)),
      Int("corpus.feat_dim", "feature dimension", DUALASR_REF(corpus.feat_dim)),
      Int("corpus.dur_min", "clean frames per unit, minimum", DUALASR_REF(corpus.dur_min)),
      Int("corpus.dur_max", "clean frames per unit, maximum", DUALASR_REF(corpus.dur_max)),
      Int("corpus.spont_dur_min", "spontaneous frames per unit, minimum",
          DUALASR_REF(corpus.spont_dur_min)),
      Int("corpus.spont_dur_max", "spontaneous frames per unit, maximum",
          DUALASR_REF(corpus.spont_dur_max)),
      Real("corpus.noise", "clean feature noise", DUALASR_REF(corpus.noise)),
      Real("corpus.spont_noise", "spontaneous feature noise", DUALASR_REF(corpus.spont_noise)),
      Real("corpus.channel", "spontaneous channel distortion", DUALASR_REF(corpus.channel)),
      Real("corpus.spont_fraction", "spontaneous share of verbatim-train",
           DUALASR_REF(corpus.spont_fraction)),
      Real("corpus.p_filler", "filler probability per word", DUALASR_REF(corpus.p_filler)),
      Real("corpus.p_repeat", "repetition probability per word", DUALASR_REF(corpus.p_repeat)),
      Real("corpus.p_variant", "dialect variant probability", DUALASR_REF(corpus.p_variant)),
      Real("corpus.p_compress", "subtitle compression probability", DUALASR_REF(corpus.p_compress)),
      Int("corpus.jitter", "subtitle segment boundary jitter in frames", DUALASR_REF(corpus.jitter)),

      Int("bpe.vocab_size", "subword vocabulary size", DUALASR_REF(bpe_vocab_size)),

      Int("model.d_model", "model width", DUALASR_REF(model.d_model)),
      Int("model.n_heads", "attention heads", DUALASR_REF(model.n_heads)),
      Int("model.encoder_layers", "encoder layers", DUALASR_REF(model.encoder_layers)),
      Int("model.decoder_layers", "layers per decoder", DUALASR_REF(model.decoder_layers)),
      Int("model.ffn_dim", "feed-forward width", DUALASR_REF(model.ffn_dim)),
      Real("model.dropout", "dropout rate", DUALASR_REF(model.dropout)),
      Int("model.max_target_length", "decoder length limit", DUALASR_REF(model.max_target_length)),

      Int("train.epochs", "training epochs", DUALASR_REF(train.epochs)),
      Int("train.batch_size", "utterances per micro-batch", DUALASR_REF(train.batch_size)),
      Int("train.accumulation", "micro-batches per optimizer step", DUALASR_REF(train.accumulation)),
      Int("train.warmup", "warmup steps", DUALASR_REF(train.warmup)),
      Real("train.peak_lr", "peak learning rate", DUALASR_REF(train.peak_lr)),
      Int("train.seed", "training seed", DUALASR_REF(train.seed)),
      Real("train.lambda_ctc", "CTC weight", DUALASR_REF(train.weights.ctc)),
      Real("train.lambda_asr", "ASR task weight", DUALASR_REF(train.weights.asr)),
      Real("train.lambda_subs", "subtitle task weight", DUALASR_REF(train.weights.subs)),
      Real("train.smoothing", "label smoothing", DUALASR_REF(train.weights.smoothing)),
      Flag("train.freeze_encoder", "freeze subsampling and encoder", DUALASR_REF(train.freeze_encoder)),
      {"train.mixing", "batch composition: verbatim-only, subtitle-only, equal-mix, as-is",
       [](const RunConfig& c) { return std::string(MixingName(c.train.mixing)); },
       [](RunConfig& c, const std::string& v) {
         c.train.mixing = ParseEnum<Mixing>("train.mixing", v, ParseMixing, "a mixing mode");
       }},
      Flag("train.spec_augment", "apply SpecAugment", DUALASR_REF(train.spec_augment)),
      Real("train.divergence_factor", "stop when an epoch loss exceeds this multiple of epoch 1",
           DUALASR_REF(train.divergence_factor)),

      Real("init.lr_scale", "peak learning rate factor for initialized models",
           DUALASR_REF(init_lr_scale)),
      Flag("init.subtitle_from_asr", "also initialize the subtitle decoder from the ASR decoder",
           DUALASR_REF(init_subtitle_from_asr)),

      {"cross.mode", "decoder cross connection: sum or concat",
       [](const RunConfig& c) { return std::string(CrossModeName(c.cross_mode)); },
       [](RunConfig& c, const std::string& v) {
         c.cross_mode = ParseEnum<CrossMode>("cross.mode", v, ParseCrossMode, "a cross mode");
       }},
      Flag("cross.freeze_encoder", "freeze the encoder during cross finetuning",
           DUALASR_REF(cross_freeze_encoder)),

      {"pseudo.target", "verbatim-for-subtitled, subtitle-for-verbatim or both",
       [](const RunConfig& c) { return std::string(PseudoLabelTargetName(c.pseudo_target)); },
       [](RunConfig& c, const std::string& v) {
         c.pseudo_target = ParseEnum<PseudoLabelTarget>("pseudo.target", v,
                                                        ParsePseudoLabelTarget, "a target");
       }},
      Int("pseudo.limit", "utterances labeled per training split, 0 for all",
          DUALASR_REF(pseudo_limit)),

      Int("decode.beam", "beam size", DUALASR_REF(search.beam)),
      Real("decode.ctc_weight", "CTC weight in ASR decoding", DUALASR_REF(search.ctc_weight)),
      Real("decode.max_length_ratio", "output length cap per encoder frame",
           DUALASR_REF(search.max_length_ratio)),
      Int("decode.nbest", "hypotheses kept per utterance", DUALASR_REF(search.nbest)),
      Int("decode.k_asr", "tuple search ASR candidates per step, 0 for beam",
          DUALASR_REF(tuple.k_asr)),
      Int("decode.k_subs", "tuple search subtitle candidates per step, 0 for beam",
          DUALASR_REF(tuple.k_subs)),
      Real("decode.w_asr", "tuple search ASR weight", DUALASR_REF(tuple.w_asr)),
      Real("decode.w_subs", "tuple search subtitle weight", DUALASR_REF(tuple.w_subs)),

      Int("average.top_k", "checkpoints averaged by validation accuracy", DUALASR_REF(average_top_k)),
  };
  return kFields;
}

#undef DUALASR_REF

const Field& Find(const std::string& key) {
  static const std::unordered_map<std::string, const Field*> kIndex = [] {
    std::unordered_map<std::string, const Field*> index;
    for (const auto& f : Fields()) index[f.key] = &f;
    return index;
  }();
  const auto it = kIndex.find(key);
  if (it == kIndex.end()) throw CliError(ErrorCategory::kConfig, "unknown key '" + key + "'");
  return *it->second;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& RunConfig::Keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& f : Fields()) keys.push_back(f.key);
    return keys;
  }();
  return kKeys;
}

std::string RunConfig::Help(const std::string& key) { return Find(key).help; }

void RunConfig::Set(const std::string& key, const std::string& value) {
  Find(key).set(*this, Trim(value));
}

std::string RunConfig::Get(const std::string& key) const { return Find(key).get(*this); }

void RunConfig::MergeText(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw CliError(ErrorCategory::kConfig,
                     origin + ":" + std::to_string(n) + ": expected key=value, got '" + t + "'");
    }
    try {
      Set(Trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const CliError& e) {
      throw CliError(ErrorCategory::kConfig, origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::MergeFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(ErrorCategory::kMissingArtifact, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  MergeText(buf.str(), path);
}

std::string RunConfig::Serialize() const {
  std::string out;
  for (const auto& f : Fields()) out += f.key + "=" + f.get(*this) + "\n";
  return out;
}

void RunConfig::Validate() const {
  try {
    corpus.Validate();
    ModelConfig m = model;
    m.vocab_size = bpe_vocab_size;
    m.feat_dim = corpus.feat_dim;
    m.Validate();
    train.Validate();
    search.Validate();
    EffectiveTupleOptions().Validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(ErrorCategory::kConfig, e.what());
  }
  if (bpe_vocab_size <= Vocabulary::kNumReserved) {
    throw CliError(ErrorCategory::kConfig, "bpe.vocab_size must exceed the reserved ids");
  }
  if (!(init_lr_scale > 0.0)) throw CliError(ErrorCategory::kConfig, "init.lr_scale must be > 0");
  if (pseudo_limit < 0) throw CliError(ErrorCategory::kConfig, "pseudo.limit must be >= 0");
  if (average_top_k < 1) throw CliError(ErrorCategory::kConfig, "average.top_k must be >= 1");
  if (cross_mode == CrossMode::kNone) {
    throw CliError(ErrorCategory::kConfig, "cross.mode must be sum or concat");
  }
}

TupleOptions RunConfig::EffectiveTupleOptions() const {
  TupleOptions t = tuple;
  t.beam = search.beam;
  t.ctc_weight = search.ctc_weight;
  t.max_length_ratio = search.max_length_ratio;
  t.nbest = search.nbest;
  return t;
}

}  // namespace dualasr
