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

#include "dualasr/tokenizer/vocabulary.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace dualasr {

namespace {

const char* const kReservedTokens[Vocabulary::kNumReserved] = {
    "<blank>", "<sos>", "<eos>", "<unk>", "<pad>"};

size_t CodePointLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string> CodePoints(std::string_view s) {
  std::vector<std::string> out;
  for (size_t i = 0; i < s.size();) {
    const size_t n = std::min(CodePointLength(s[i]), s.size() - i);
    out.emplace_back(s.substr(i, n));
    i += n;
  }
  return out;
}

// Initial segmentation of a word: marker fused with its first character.
std::vector<std::string> BaseUnits(const std::string& word) {
  std::vector<std::string> units = CodePoints(word);
  if (!units.empty()) units[0] = std::string(Vocabulary::kMarker) + units[0];
  return units;
}

}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) AddToken(t);
}

void Vocabulary::AddToken(const std::string& token) {
  if (ids_.count(token)) throw std::logic_error("duplicate token " + token);
  ids_[token] = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  max_token_bytes_ = std::max(max_token_bytes_, token.size());
}

int Vocabulary::Id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

Vocabulary Vocabulary::TrainBpe(const std::vector<std::string>& verbatim_lines,
                                const std::vector<std::string>& subtitle_lines,
                                int vocab_size) {
  // Word type -> frequency; std::map keeps iteration order independent of
  // hashing.
  std::map<std::string, long> word_counts;
  for (const auto* lines : {&verbatim_lines, &subtitle_lines}) {
    for (const std::string& line : *lines) {
      for (const std::string& w : SplitWords(line)) ++word_counts[w];
    }
  }
  if (word_counts.empty()) throw std::invalid_argument("empty BPE corpus");

  std::vector<std::vector<std::string>> words;
  std::vector<long> counts;
  std::set<std::string> alphabet;
  for (const auto& [w, c] : word_counts) {
    words.push_back(BaseUnits(w));
    counts.push_back(c);
    alphabet.insert(words.back().begin(), words.back().end());
  }
  const int base = static_cast<int>(alphabet.size());
  if (vocab_size < base + kNumReserved) {
    throw std::invalid_argument(
        "vocab_size " + std::to_string(vocab_size) + " below " +
        std::to_string(base + kNumReserved) +
        " (character units + reserved tokens)");
  }

  Vocabulary vocab;
  for (const std::string& unit : alphabet) vocab.AddToken(unit);
  vocab.num_base_units_ = base;

  while (vocab.size() < vocab_size) {
    std::map<Merge, long> pair_counts;
    for (size_t w = 0; w < words.size(); ++w) {
      for (size_t i = 0; i + 1 < words[w].size(); ++i) {
        pair_counts[{words[w][i], words[w][i + 1]}] += counts[w];
      }
    }
    // std::map iterates pairs in lexicographic order, so the first maximum
    // wins ties.
    const Merge* best = nullptr;
    long best_count = 0;
    for (const auto& [pair, c] : pair_counts) {
      if (c > best_count) {
        best = &pair;
        best_count = c;
      }
    }
    if (best == nullptr) break;
    const Merge merge = *best;
    const std::string joined = merge.first + merge.second;
    for (auto& units : words) {
      std::vector<std::string> merged;
      merged.reserve(units.size());
      for (size_t i = 0; i < units.size(); ++i) {
        if (i + 1 < units.size() && units[i] == merge.first &&
            units[i + 1] == merge.second) {
          merged.push_back(joined);
          ++i;
        } else {
          merged.push_back(units[i]);
        }
      }
      units = std::move(merged);
    }
    vocab.merges_.push_back(merge);
    if (vocab.Id(joined) < 0) vocab.AddToken(joined);
  }
  return vocab;
}

std::vector<std::string> Vocabulary::EncodeAsPieces(std::string_view text) const {
  std::vector<std::string> pieces;
  for (const int id : Encode(text)) pieces.push_back(tokens_[id]);
  return pieces;
}

std::vector<int> Vocabulary::Encode(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& word : SplitWords(text)) {
    const std::string s = std::string(kMarker) + word;
    size_t pos = 0;
    while (pos < s.size()) {
      int found = -1;
      size_t found_len = 0;
      for (size_t len = std::min(max_token_bytes_, s.size() - pos); len > 0;
           --len) {
        auto it = ids_.find(s.substr(pos, len));
        if (it != ids_.end() && it->second >= kNumReserved) {
          found = it->second;
          found_len = len;
          break;
        }
      }
      if (found < 0) {
        // Unknown unit: one code point, plus the marker at a word start.
        size_t len = pos == 0 ? kMarker.size() : 0;
        if (pos + len < s.size()) len += CodePointLength(s[pos + len]);
        found = kUnk;
        found_len = std::min(len, s.size() - pos);
      }
      ids.push_back(found);
      pos += found_len;
    }
  }
  return ids;
}

std::string Vocabulary::Decode(std::span<const int> ids) const {
  std::string joined;
  for (const int id : ids) {
    if (id == kUnk) {
      joined += "<unk>";
    } else if (id >= kNumReserved && id < size()) {
      joined += tokens_[id];
    }
  }
  std::string out;
  for (size_t i = 0; i < joined.size();) {
    if (joined.compare(i, kMarker.size(), kMarker) == 0) {
      if (!out.empty()) out += ' ';
      i += kMarker.size();
    } else {
      out += joined[i++];
    }
  }
  return out;
}

void Vocabulary::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path);
  for (const std::string& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < kNumReserved) {
    throw std::runtime_error("vocabulary file too short: " + path);
  }
  for (int i = 0; i < kNumReserved; ++i) {
    if (lines[i] != kReservedTokens[i]) {
      throw std::runtime_error("vocabulary header mismatch at line " +
                               std::to_string(i) + " in " + path);
    }
  }
  Vocabulary vocab;
  for (size_t i = kNumReserved; i < lines.size(); ++i) {
    vocab.AddToken(lines[i]);
    if (CodePoints(lines[i]).size() == 1 ||
        (lines[i].rfind(kMarker, 0) == 0 &&
         CodePoints(lines[i]).size() == 2)) {
      ++vocab.num_base_units_;
    }
  }
  return vocab;
}

}  // namespace dualasr
