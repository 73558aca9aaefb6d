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

#include "dualasr/corpus/lexicon.h"

#include <stdexcept>

namespace dualasr {

namespace {

const char* const kFunctionWords[] = {"de",  "het", "een", "en",  "dat",
                                      "is",  "ik",  "jij", "je",  "niet",
                                      "op",  "in",  "met", "mijn", "zijn",
                                      "ook", "wel", "van"};
const char* const kCoreContent[] = {"goed", "komt", "ja",   "moment",
                                    "net",  "feit", "huis", "eerste"};
const char* const kFillers[] = {"uh", "euh", "ehm"};
// {spoken form, standard form}
const char* const kVariants[][2] = {
    {"'t", "het"},  {"'k", "ik"},    {"'n", "een"},  {"m'n", "mijn"},
    {"z'n", "zijn"}, {"gij", "jij"}, {"ge", "je"},   {"nie", "niet"},
    {"da", "dat"},  {"ne", "een"}};
// Function words that compression may drop.
const char* const kDroppable[] = {"de", "het", "een", "en", "dat", "ook", "wel"};

const char* const kOnsets[] = {"b", "d", "g", "k", "l", "m", "n", "p", "r",
                               "s", "t", "v", "w", "z", "st", "br", "kl", "sch"};
const char* const kNuclei[] = {"a", "e", "i", "o", "u", "aa", "ee", "oo", "ui", "ij"};
const char* const kCodas[] = {"", "", "n", "t", "k", "s", "l", "r", "m"};

template <size_t N>
const char* Pick(const char* const (&table)[N], std::mt19937_64& rng) {
  return table[std::uniform_int_distribution<size_t>(0, N - 1)(rng)];
}

}  // namespace

Lexicon Lexicon::Build(int num_generated, uint64_t seed) {
  if (num_generated < 0) throw std::invalid_argument("negative lexicon size");
  Lexicon lex;
  std::set<std::string> taken;
  for (const char* w : kFunctionWords) {
    lex.function_.push_back(w);
    taken.insert(w);
  }
  for (const char* w : kCoreContent) {
    lex.content_.push_back(w);
    taken.insert(w);
  }
  for (const char* w : kFillers) {
    lex.fillers_.push_back(w);
    lex.filler_set_.insert(w);
    taken.insert(w);
  }
  for (const auto& v : kVariants) {
    lex.variants_[v[0]] = v[1];
    lex.variants_of_[v[1]].push_back(v[0]);
    taken.insert(v[0]);
  }
  for (const char* w : kDroppable) lex.function_set_.insert(w);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> syllables(1, 2);
  int attempts = 0;
  while (static_cast<int>(lex.content_.size()) <
         static_cast<int>(std::size(kCoreContent)) + num_generated) {
    if (++attempts > 100000) throw std::invalid_argument("lexicon size too large");
    std::string word;
    const int n = syllables(rng);
    for (int s = 0; s < n; ++s) {
      word += Pick(kOnsets, rng);
      word += Pick(kNuclei, rng);
      word += Pick(kCodas, rng);
    }
    if (word.size() < 3 || !taken.insert(word).second) continue;
    lex.content_.push_back(word);
  }
  lex.standard_ = lex.function_;
  lex.standard_.insert(lex.standard_.end(), lex.content_.begin(), lex.content_.end());
  return lex;
}

const std::vector<std::string>& Lexicon::VariantsOf(const std::string& word) const {
  static const std::vector<std::string> kNone;
  auto it = variants_of_.find(word);
  return it == variants_of_.end() ? kNone : it->second;
}

bool Lexicon::IsFiller(const std::string& word) const {
  return filler_set_.count(word) > 0;
}

bool Lexicon::IsFunctionWord(const std::string& word) const {
  return function_set_.count(word) > 0;
}

const std::string& Lexicon::Standardize(const std::string& word) const {
  auto it = variants_.find(word);
  return it == variants_.end() ? word : it->second;
}

std::vector<std::string> SubtitleEdit(const std::vector<std::string>& spoken,
                                      const Lexicon& lexicon, double p_compress,
                                      std::mt19937_64& rng) {
  std::vector<std::string> no_fillers;
  for (const auto& w : spoken) {
    if (!lexicon.IsFiller(w)) no_fillers.push_back(w);
  }
  std::vector<std::string> collapsed;
  for (const auto& w : no_fillers) {
    if (collapsed.empty() || collapsed.back() != w) collapsed.push_back(w);
  }
  std::vector<std::string> out;
  std::bernoulli_distribution drop(p_compress);
  for (const auto& w : collapsed) {
    const std::string& standard = lexicon.Standardize(w);
    if (p_compress > 0.0 && lexicon.IsFunctionWord(standard) && drop(rng)) {
      continue;
    }
    out.push_back(standard);
  }
  return out;
}

}  // namespace dualasr
