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

#ifndef DUALASR_CORPUS_LEXICON_H_
#define DUALASR_CORPUS_LEXICON_H_

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace dualasr {

// Word inventory of the synthetic Flemish-like language.
//
// Standard words are a fixed core (function words and a few content words)
// plus generated pseudo-words. Dialect variants and apostrophe contractions
// map one spoken word onto one standard word.
class Lexicon {
 public:
  // Builds the fixed core plus `num_generated` pseudo-words drawn with
  // `seed`. Generated words never collide with the core inventory.
  static Lexicon Build(int num_generated, uint64_t seed);

  const std::vector<std::string>& standard_words() const { return standard_; }
  const std::vector<std::string>& content_words() const { return content_; }
  const std::vector<std::string>& function_words() const { return function_; }
  const std::vector<std::string>& fillers() const { return fillers_; }

  // Spoken variant -> standard form (dialect words and contractions).
  const std::map<std::string, std::string>& variants() const { return variants_; }
  // Standard word -> its spoken variants, empty when it has none.
  const std::vector<std::string>& VariantsOf(const std::string& word) const;

  bool IsFiller(const std::string& word) const;
  bool IsFunctionWord(const std::string& word) const;
  // Maps a dialect or contracted form to its standard word; identity
  // otherwise.
  const std::string& Standardize(const std::string& word) const;

 private:
  std::vector<std::string> standard_;
  std::vector<std::string> content_;
  std::vector<std::string> function_;
  std::vector<std::string> fillers_;
  std::set<std::string> filler_set_;
  std::set<std::string> function_set_;
  std::map<std::string, std::string> variants_;
  std::map<std::string, std::vector<std::string>> variants_of_;
};

// Turns a spoken word sequence into subtitle text. In order: (1) drop
// fillers, (2) collapse immediate repetitions, (3) map dialect words and
// contractions to standard forms, (4) drop each function word with
// probability `p_compress`. May return an empty sequence.
std::vector<std::string> SubtitleEdit(const std::vector<std::string>& spoken,
                                      const Lexicon& lexicon, double p_compress,
                                      std::mt19937_64& rng);

}  // namespace dualasr

#endif  // DUALASR_CORPUS_LEXICON_H_
