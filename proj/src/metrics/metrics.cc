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

#include "dualasr/metrics/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dualasr {

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_words += o.ref_words;
  return *this;
}

std::vector<std::string> ScoringWords(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u) && c != '\'') {
      cleaned += ' ';
    } else {
      cleaned += static_cast<char>(std::tolower(u));
    }
  }
  std::vector<std::string> words;
  std::istringstream in(cleaned);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

EditCounts AlignWords(std::span<const std::string> ref,
                      std::span<const std::string> hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }
  EditCounts counts;
  counts.ref_words = static_cast<int>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) ++counts.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

double CorpusWer(std::span<const EditCounts> per_utterance) {
  EditCounts total;
  for (const auto& c : per_utterance) total += c;
  if (total.ref_words == 0) {
    throw std::invalid_argument("WER undefined for an empty reference corpus");
  }
  return 100.0 * total.errors() / total.ref_words;
}

BleuResult CorpusBleu(const std::vector<std::vector<std::string>>& refs,
                      const std::vector<std::vector<std::string>>& hyps) {
  if (refs.size() != hyps.size()) {
    throw std::invalid_argument("BLEU needs one hypothesis per reference");
  }
  BleuResult r;
  for (size_t u = 0; u < refs.size(); ++u) {
    r.hyp_length += static_cast<long>(hyps[u].size());
    r.ref_length += static_cast<long>(refs[u].size());
    for (int n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, long> ref_grams, hyp_grams;
      for (size_t i = 0; i + n <= refs[u].size(); ++i) {
        ++ref_grams[{refs[u].begin() + i, refs[u].begin() + i + n}];
      }
      for (size_t i = 0; i + n <= hyps[u].size(); ++i) {
        ++hyp_grams[{hyps[u].begin() + i, hyps[u].begin() + i + n}];
      }
      for (const auto& [gram, count] : hyp_grams) {
        auto it = ref_grams.find(gram);
        r.matches[n - 1] += std::min(count, it == ref_grams.end() ? 0 : it->second);
        r.totals[n - 1] += count;
      }
    }
  }
  r.precisions[0] =
      r.totals[0] ? static_cast<double>(r.matches[0]) / r.totals[0] : 0.0;
  for (int n = 1; n < 4; ++n) {
    r.precisions[n] = (r.matches[n] + 1.0) / (r.totals[n] + 1.0);
  }
  if (r.hyp_length == 0 || r.matches[0] == 0) return r;
  double log_sum = 0.0;
  for (double p : r.precisions) log_sum += std::log(p);
  r.brevity_penalty =
      r.hyp_length > r.ref_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(r.ref_length) / r.hyp_length);
  r.bleu = r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

EvalReport Evaluate(const std::vector<std::string>& refs,
                    const std::vector<std::string>& hyps, bool wer,
                    bool bleu) {
  if (refs.size() != hyps.size()) {
    throw std::invalid_argument("reference and hypothesis counts differ");
  }
  EvalReport report;
  std::vector<std::vector<std::string>> ref_words, hyp_words;
  for (size_t i = 0; i < refs.size(); ++i) {
    ref_words.push_back(ScoringWords(refs[i]));
    hyp_words.push_back(ScoringWords(hyps[i]));
  }
  if (wer) {
    for (size_t i = 0; i < refs.size(); ++i) {
      report.per_utterance.push_back(AlignWords(ref_words[i], hyp_words[i]));
      report.total += report.per_utterance.back();
    }
    report.wer = CorpusWer(report.per_utterance);
    report.has_wer = true;
  }
  if (bleu) {
    if (refs.empty()) throw std::invalid_argument("BLEU on an empty corpus");
    report.bleu = CorpusBleu(ref_words, hyp_words);
    report.has_bleu = true;
  }
  return report;
}

std::string FormatReport(const EvalReport& report) {
  std::ostringstream os;
  char buf[160];
  if (report.has_wer) {
    std::snprintf(buf, sizeof(buf),
                  "utterances %zu  ref words %d  sub %d  ins %d  del %d\n",
                  report.per_utterance.size(), report.total.ref_words,
                  report.total.substitutions, report.total.insertions,
                  report.total.deletions);
    os << buf;
  }
  if (report.has_bleu) {
    const auto& b = report.bleu;
    std::snprintf(buf, sizeof(buf),
                  "bleu precisions %.4f %.4f %.4f %.4f  bp %.4f  hyp %ld ref %ld\n",
                  b.precisions[0], b.precisions[1], b.precisions[2],
                  b.precisions[3], b.brevity_penalty, b.hyp_length,
                  b.ref_length);
    os << buf;
  }
  if (report.has_wer) {
    std::snprintf(buf, sizeof(buf), "WER\t%.2f\n", report.wer);
    os << buf;
  }
  if (report.has_bleu) {
    std::snprintf(buf, sizeof(buf), "BLEU\t%.2f\n", 100.0 * report.bleu.bleu);
    os << buf;
  }
  return os.str();
}

}  // namespace dualasr
