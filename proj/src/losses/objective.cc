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

#include "dualasr/losses/objective.h"

#include <stdexcept>

#include "dualasr/losses/ctc.h"
#include "dualasr/tensor/ops.h"
#include "dualasr/tokenizer/vocabulary.h"

namespace dualasr {

namespace {

template <typename T>
Tensor<T> MeanOf(const std::vector<Tensor<T>>& terms) {
  Tensor<T> sum = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) sum = Add(sum, terms[i]);
  return terms.size() == 1 ? sum : Scale(sum, static_cast<T>(1.0 / terms.size()));
}

}  // namespace

double LossReport::Recombine(const LossWeights& w) const {
  return w.asr * ((1.0 - w.ctc) * att_asr + w.ctc * ctc) + w.subs * att_subs;
}

std::vector<int> DecoderInput(std::span<const int> target) {
  std::vector<int> in = {Vocabulary::kSos};
  in.insert(in.end(), target.begin(), target.end());
  return in;
}

std::vector<int> DecoderOutput(std::span<const int> target) {
  std::vector<int> out(target.begin(), target.end());
  out.push_back(Vocabulary::kEos);
  return out;
}

template <typename T>
LossResult<T> TotalLoss(const DualDecoderModel<T>& model, const Batch& batch,
                        const LossWeights& weights) {
  weights.Validate();
  const bool cross = model.config().cross_mode != CrossMode::kNone;
  const bool want_asr = weights.asr > 0.0;
  const bool want_subs = weights.subs > 0.0;
  const bool want_ctc = want_asr && weights.ctc > 0.0;
  const bool want_att = want_asr && weights.ctc < 1.0;

  LossResult<T> result;
  LossReport& r = result.report;
  std::vector<Tensor<T>> att_terms, ctc_terms, subs_terms;
  for (int i = 0; i < batch.size; ++i) {
    const bool has_v = batch.has_verbatim[i], has_s = batch.has_subtitle[i];
    r.verbatim_utterances += has_v;
    r.subtitle_utterances += has_s;
    const bool use_v = has_v && want_asr, use_s = has_s && want_subs;
    if (!use_v && !use_s) continue;
    if (cross && !(has_v && has_s)) {
      throw std::invalid_argument("cross-connected training needs both targets for " +
                                  batch.ids[i]);
    }
    const auto enc = model.Encode(batch.FeaturesOf(i));
    const auto verbatim = batch.VerbatimOf(i);
    const auto subtitle = batch.SubtitleOf(i);

    Tensor<T> asr_logits, subs_logits;
    if (cross && ((use_v && want_att) || use_s)) {
      auto out = model.DecodeCrossConnected(DecoderInput(verbatim), DecoderInput(subtitle), enc);
      asr_logits = out.asr;
      subs_logits = out.subtitle;
    } else {
      if (use_v && want_att) {
        asr_logits = model.DecodeTeacherForced(DecoderKind::kAsr, DecoderInput(verbatim), enc);
      }
      if (use_s) {
        subs_logits =
            model.DecodeTeacherForced(DecoderKind::kSubtitle, DecoderInput(subtitle), enc);
      }
    }
    if (use_v && want_att) {
      const auto target = DecoderOutput(verbatim);
      att_terms.push_back(LabelSmoothedCrossEntropy(asr_logits, std::span<const int>(target),
                                                    weights.smoothing, Vocabulary::kPad));
    }
    if (use_v && want_ctc) {
      try {
        const Tensor<T> ctc = CtcLoss(model.CtcLogits(enc), verbatim, Vocabulary::kBlank);
        ctc_terms.push_back(
            Scale(ctc, static_cast<T>(1.0 / std::max<size_t>(1, verbatim.size()))));
      } catch (const CtcInfeasibleError&) {
        r.dropped_ctc.push_back(batch.ids[i]);
      }
    }
    if (use_s) {
      const auto target = DecoderOutput(subtitle);
      subs_terms.push_back(LabelSmoothedCrossEntropy(subs_logits, std::span<const int>(target),
                                                     weights.smoothing, Vocabulary::kPad));
    }
  }
  r.ctc_utterances = static_cast<int>(ctc_terms.size());

  std::vector<Tensor<T>> parts;
  if (!att_terms.empty()) {
    const Tensor<T> att = MeanOf(att_terms);
    r.att_asr = att.item();
    parts.push_back(Scale(att, static_cast<T>(weights.asr * (1.0 - weights.ctc))));
  }
  if (!ctc_terms.empty()) {
    const Tensor<T> ctc = MeanOf(ctc_terms);
    r.ctc = ctc.item();
    parts.push_back(Scale(ctc, static_cast<T>(weights.asr * weights.ctc)));
  }
  if (!subs_terms.empty()) {
    const Tensor<T> subs = MeanOf(subs_terms);
    r.att_subs = subs.item();
    parts.push_back(Scale(subs, static_cast<T>(weights.subs)));
  }
  r.asr = (1.0 - weights.ctc) * r.att_asr + weights.ctc * r.ctc;
  if (parts.empty()) {
    result.total = Tensor<T>::Scalar(T(0));
  } else {
    result.total = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) result.total = Add(result.total, parts[i]);
  }
  r.total = result.total.item();
  return result;
}

template LossResult<float> TotalLoss(const DualDecoderModel<float>&, const Batch&,
                                     const LossWeights&);
template LossResult<double> TotalLoss(const DualDecoderModel<double>&, const Batch&,
                                      const LossWeights&);

}  // namespace dualasr
