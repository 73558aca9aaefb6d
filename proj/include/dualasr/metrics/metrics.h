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

#ifndef DUALASR_METRICS_METRICS_H_
#define DUALASR_METRICS_METRICS_H_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualasr {

struct EditCounts {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_words = 0;

  int errors() const { return substitutions + insertions + deletions; }
  EditCounts& operator+=(const EditCounts& o);
};

// Lowercases and strips punctuation other than apostrophes, then splits on
// whitespace.
std::vector<std::string> ScoringWords(std::string_view text);

// Unit-cost Levenshtein alignment. Among equally cheap alignments the
// backtrace prefers diagonal moves, then deletions, then insertions.
EditCounts AlignWords(std::span<const std::string> ref,
                      std::span<const std::string> hyp);

// Corpus WER in percent from summed counts. Throws std::invalid_argument when
// the reference corpus has no words.
double CorpusWer(std::span<const EditCounts> per_utterance);

struct BleuResult {
  double bleu = 0.0;  // in [0, 1]
  std::array<double, 4> precisions{};
  std::array<long, 4> matches{};
  std::array<long, 4> totals{};
  long hyp_length = 0;
  long ref_length = 0;
  double brevity_penalty = 0.0;
};

// Corpus-level BLEU-4 with uniform weights:
//   p1 = m1 / c1,  pn = (mn + 1) / (cn + 1) for n = 2..4,
//   BP = 1 if c > r else exp(1 - r / c),
//   BLEU = BP * exp(mean(log pn)),
// with clipped n-gram matches mn, hypothesis n-gram counts cn, hypothesis
// length c and reference length r summed over the corpus. BLEU is 0 when the
// hypotheses are empty or p1 = 0.
BleuResult CorpusBleu(const std::vector<std::vector<std::string>>& refs,
                      const std::vector<std::vector<std::string>>& hyps);

struct EvalReport {
  std::vector<EditCounts> per_utterance;
  EditCounts total;
  double wer = 0.0;  // percent
  BleuResult bleu;
  bool has_wer = false;
  bool has_bleu = false;
};

EvalReport Evaluate(const std::vector<std::string>& refs,
                    const std::vector<std::string>& hyps, bool wer, bool bleu);

// Human-readable summary followed by machine-readable `WER\tx.xx` and/or
// `BLEU\tx.xx` lines.
std::string FormatReport(const EvalReport& report);

}  // namespace dualasr

#endif  // DUALASR_METRICS_METRICS_H_
