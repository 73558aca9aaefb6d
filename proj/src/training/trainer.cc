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


#include "dualasr/training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>

#include "glog/logging.h"
#include "dualasr/common/seed.h"
#include "dualasr/corpus/features.h"
#include "dualasr/losses/ctc.h"
#include "dualasr/losses/objective.h"
#include "dualasr/tensor/ops.h"

namespace dualasr {

TrainConfig TrainConfig::FullScale() {
  TrainConfig c;
  c.epochs = 100;
  c.batch_size = 32;
  c.accumulation = 8;
  c.warmup = 25000;
  c.peak_lr = 0.004;
  return c;
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(accumulation >= 1, "accumulation must be >= 1");
  require(warmup >= 1, "warmup must be >= 1");
  require(peak_lr > 0.0, "peak_lr must be positive");
  require(divergence_factor > 1.0, "divergence_factor must exceed 1");
  weights.Validate();
}

ValidationMetrics EvaluateAsr(const Model& model, std::span<const Utterance> dev,
                              const LossWeights& weights) {
  NoGradScope<double> no_grad;
  const bool cross = model.config().cross_mode != CrossMode::kNone;
  int64_t correct = 0, total = 0;
  double att_sum = 0.0, ctc_sum = 0.0;
  int att_n = 0, ctc_n = 0;
  for (const Utterance& u : dev) {
    if (!u.verbatim) continue;
    const auto enc = model.Encode(u.features);
    const auto in = DecoderInput(*u.verbatim);
    const auto out = DecoderOutput(*u.verbatim);
    const Tensor<double> logits =
        cross && u.subtitle
            ? model.DecodeCrossConnected(in, DecoderInput(*u.subtitle), enc).asr
            : model.DecodeTeacherForced(DecoderKind::kAsr, in, enc);
    const int v = logits.dim(1);
    const auto data = logits.data();
    for (size_t i = 0; i < out.size(); ++i) {
      const auto row = data.subspan(i * v, v);
      const int arg = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += arg == out[i];
      ++total;
    }
    att_sum += LabelSmoothedCrossEntropy(logits, std::span<const int>(out), weights.smoothing,
                                         Vocabulary::kPad)
                   .item();
    ++att_n;
    if (weights.ctc > 0.0) {
      try {
        ctc_sum += CtcLoss(model.CtcLogits(enc), std::span<const int>(*u.verbatim),
                           Vocabulary::kBlank)
                       .item() /
                   std::max<size_t>(1, u.verbatim->size());
        ++ctc_n;
      } catch (const CtcInfeasibleError&) {
      }
    }
  }
  ValidationMetrics m;
  if (total > 0) m.asr_accuracy = static_cast<double>(correct) / total;
  const double att = att_n ? att_sum / att_n : 0.0;
  const double ctc = ctc_n ? ctc_sum / ctc_n : 0.0;
  m.asr_loss = (1.0 - weights.ctc) * att + weights.ctc * ctc;
  return m;
}

double EvaluateSubtitleLoss(const Model& model, std::span<const Utterance> dev,
                            const LossWeights& weights) {
  NoGradScope<double> no_grad;
  const bool cross = model.config().cross_mode != CrossMode::kNone;
  double sum = 0.0;
  int n = 0;
  for (const Utterance& u : dev) {
    if (!u.subtitle) continue;
    const auto enc = model.Encode(u.features);
    const auto in = DecoderInput(*u.subtitle);
    const auto out = DecoderOutput(*u.subtitle);
    const Tensor<double> logits =
        cross && u.verbatim
            ? model.DecodeCrossConnected(DecoderInput(*u.verbatim), in, enc).subtitle
            : model.DecodeTeacherForced(DecoderKind::kSubtitle, in, enc);
    sum += LabelSmoothedCrossEntropy(logits, std::span<const int>(out), weights.smoothing,
                                     Vocabulary::kPad)
               .item();
    ++n;
  }
  return n ? sum / n : 0.0;
}

TrainResult Train(Model& model, std::span<const Utterance> train, std::span<const Utterance> dev,
                  const TrainConfig& config, const std::string& out_dir, std::ostream* log) {
  config.Validate();
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  if (config.freeze_encoder) model.Freeze(Component::kEncoder);

  BatchOptions options;
  options.batch_size = config.batch_size;
  options.mixing = config.mixing;
  options.spec_augment = config.spec_augment;

  Adam adam;
  TrainResult result;
  double first_epoch_mean = 0.0;
  int64_t step = 0;
  char line[256];
  for (int epoch = 1; epoch <= config.epochs && !result.diverged; ++epoch) {
    model.SetTraining(true, DeriveSeed(config.seed, {2, static_cast<uint64_t>(epoch)}));
    const auto batches =
        MakeBatches(train, options, DeriveSeed(config.seed, {1, static_cast<uint64_t>(epoch)}));
    double loss_sum = 0.0;
    int loss_count = 0, skipped = 0;
    for (size_t start = 0; start < batches.size(); start += config.accumulation) {
      const size_t end = std::min(batches.size(), start + config.accumulation);
      const double share = 1.0 / static_cast<double>(end - start);
      ZeroGradients(model);
      LossReport agg;
      bool finite = true;
      for (size_t b = start; b < end && finite; ++b) {
        try {
          Tape<double> tape;
          TapeScope<double> scope(tape);
          const auto res = TotalLoss(model, batches[b], config.weights);
          const auto& r = res.report;
          if (!std::isfinite(r.total)) {
            finite = false;
            break;
          }
          agg.total += share * r.total;
          agg.att_asr += share * r.att_asr;
          agg.ctc += share * r.ctc;
          agg.att_subs += share * r.att_subs;
          if (epoch == 1) {
            result.dropped_ctc.insert(result.dropped_ctc.end(), r.dropped_ctc.begin(),
                                      r.dropped_ctc.end());
          }
          if (res.total.requires_grad()) tape.Backward(Scale(res.total, share));
        } catch (const NumericError& e) {
          LOG(WARNING) << "numeric failure at step " << step + 1 << ": " << e.what();
          finite = false;
        }
      }
      if (!finite) {
        result.diverged = true;
        result.divergence_reason = "non-finite training loss at step " + std::to_string(step + 1);
        break;
      }
      ++step;
      const double lr = LearningRate(step, config.warmup, config.peak_lr);
      if (!adam.Step(model, lr)) ++skipped;
      if (log) {
        std::snprintf(line, sizeof(line), "%lld\t%.6g\t%.6f\t%.6f\t%.6f\t%.6f\n",
                      static_cast<long long>(step), lr, agg.total, agg.att_asr, agg.ctc,
                      agg.att_subs);
        *log << line;
      }
      loss_sum += agg.total;
      ++loss_count;
    }
    model.SetTraining(false);
    if (result.diverged) break;

    EpochSummary summary;
    summary.epoch = epoch;
    summary.steps = step;
    summary.skipped_steps = skipped;
    summary.metrics = EvaluateAsr(model, dev, config.weights);
    summary.metrics.train_loss = loss_count ? loss_sum / loss_count : 0.0;
    if (!out_dir.empty()) {
      summary.checkpoint = out_dir + "/epoch-" + std::to_string(epoch) + ".ckpt";
      SaveCheckpoint(CaptureCheckpoint(model, &adam, epoch, summary.metrics), summary.checkpoint);
    }
    LOG(INFO) << "epoch " << epoch << " steps " << step << " train " << summary.metrics.train_loss
              << " dev acc " << summary.metrics.asr_accuracy << " dev loss "
              << summary.metrics.asr_loss;
    result.epochs.push_back(summary);

    if (epoch == 1) {
      first_epoch_mean = summary.metrics.train_loss;
    } else if (summary.metrics.train_loss > config.divergence_factor * first_epoch_mean) {
      result.diverged = true;
      result.divergence_reason = "epoch " + std::to_string(epoch) +
                                 " mean loss exceeds the first-epoch mean by more than " +
                                 std::to_string(config.divergence_factor) + "x";
    }
  }
  if (result.diverged) LOG(WARNING) << "training diverged: " << result.divergence_reason;
  return result;
}

const char* PseudoLabelTargetName(PseudoLabelTarget target) {
  switch (target) {
    case PseudoLabelTarget::kVerbatimForSubtitled:
      return "verbatim-for-subtitled";
    case PseudoLabelTarget::kSubtitleForVerbatim:
      return "subtitle-for-verbatim";
    case PseudoLabelTarget::kBoth:
      return "both";
  }
  return "?";
}

PseudoLabelTarget ParsePseudoLabelTarget(const std::string& name) {
  for (auto t : {PseudoLabelTarget::kVerbatimForSubtitled, PseudoLabelTarget::kSubtitleForVerbatim,
                 PseudoLabelTarget::kBoth}) {
    if (name == PseudoLabelTargetName(t)) return t;
  }
  throw std::invalid_argument("unknown pseudo-label target: " + name);
}

PseudoLabelResult PseudoLabel(const Model& model, const Vocabulary& vocab,
                              const std::vector<ManifestEntry>& manifest,
                              PseudoLabelTarget target, const SearchOptions& search) {
  const bool want_verbatim = target != PseudoLabelTarget::kSubtitleForVerbatim;
  const bool want_subtitle = target != PseudoLabelTarget::kVerbatimForSubtitled;
  PseudoLabelResult result;
  for (const ManifestEntry& e : manifest) {
    if (e.task == Task::kParallel) {
      result.entries.push_back(e);
      continue;
    }
    const bool fill_subtitle = e.task == Task::kVerbatim && want_subtitle;
    const bool fill_verbatim = e.task == Task::kSubtitled && want_verbatim;
    if (!fill_subtitle && !fill_verbatim) continue;
    try {
      const auto enc = model.Encode(NormalizeUtterance(ReadFeatureFile(e.feature_path)));
      const DecoderKind kind = fill_subtitle ? DecoderKind::kSubtitle : DecoderKind::kAsr;
      const auto hyps = BeamSearch(model, kind, enc, search);
      const std::string text = vocab.Decode(hyps.at(0).tokens);
      if (text.empty()) {
        LOG(WARNING) << "pseudo-label: empty decode for " << e.id << "; skipped";
        result.skipped.push_back(e.id);
        continue;
      }
      ManifestEntry out = e;
      out.task = Task::kParallel;
      if (fill_subtitle) {
        out.subtitle = text;
        out.provenance = "pseudo-subtitle";
      } else {
        out.verbatim = text;
        out.provenance = "pseudo-verbatim";
      }
      result.entries.push_back(std::move(out));
    } catch (const std::exception& ex) {
      LOG(WARNING) << "pseudo-label: decode failed for " << e.id << ": " << ex.what();
      result.skipped.push_back(e.id);
    }
  }
  return result;
}

Model BuildCrossModel(const Model& base, CrossMode mode, uint64_t seed) {
  if (base.config().cross_mode != CrossMode::kNone) {
    throw std::invalid_argument("cross finetuning starts from an independent-decoder model");
  }
  if (mode == CrossMode::kNone) throw std::invalid_argument("cross mode must be sum or concat");
  ModelConfig config = base.config();
  config.cross_mode = mode;
  Model cross(config, seed);
  cross.InitializeFrom(base, false);
  return cross;
}

TrainResult FinetuneCross(Model& cross, std::span<const Utterance> train,
                          std::span<const Utterance> dev, const TrainConfig& config,
                          const std::string& out_dir, std::ostream* log) {
  if (cross.config().cross_mode == CrossMode::kNone) {
    throw std::invalid_argument("finetune-cross needs a cross-connected model");
  }
  for (const Utterance& u : train) {
    if (!u.verbatim || !u.subtitle) {
      throw std::invalid_argument("finetune-cross needs parallel data; " + u.id +
                                  " lacks a target");
    }
  }
  TrainConfig c = config;
  c.mixing = Mixing::kAsIs;
  return Train(cross, train, dev, c, out_dir, log);
}

}  // namespace dualasr
