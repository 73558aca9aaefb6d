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

#ifndef DUALASR_TOKENIZER_VOCABULARY_H_
#define DUALASR_TOKENIZER_VOCABULARY_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dualasr {

// Subword vocabulary shared by the CTC head and both attention decoders.
//
// Word boundaries are carried by the marker "▁" fused onto the first
// character of each word, so the character-level alphabet already contains
// units like "▁a". Ids 0..4 are reserved; subword ids start at 5.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kPad = 4;
  static constexpr int kNumReserved = 5;

  static constexpr int kDeskVocabSize = 200;
  static constexpr int kFullScaleVocabSize = 5000;

  static constexpr std::string_view kMarker = "\xE2\x96\x81";  // U+2581

  using Merge = std::pair<std::string, std::string>;

  Vocabulary();

  // Classical frequency-based BPE over the words of both corpora. The most
  // frequent adjacent pair is merged first; equal counts go to the
  // lexicographically smallest pair. Stops at `vocab_size` entries (reserved
  // tokens included) or when no pair is left.
  static Vocabulary TrainBpe(const std::vector<std::string>& verbatim_lines,
                             const std::vector<std::string>& subtitle_lines,
                             int vocab_size);

  // Greedy longest match against the vocabulary, word by word. Characters
  // never seen in training become kUnk, which breaks Decode(Encode(x)) == x.
  std::vector<int> Encode(std::string_view text) const;
  std::vector<std::string> EncodeAsPieces(std::string_view text) const;
  // Skips reserved ids except kUnk, which decodes to "<unk>".
  std::string Decode(std::span<const int> ids) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& Token(int id) const { return tokens_.at(id); }
  // -1 when absent.
  int Id(const std::string& token) const;
  const std::vector<Merge>& merges() const { return merges_; }
  // Number of character-level units (vocabulary size with zero merges, minus
  // reserved tokens).
  int num_base_units() const { return num_base_units_; }

  // One token per line; line i holds id i. The first kNumReserved lines are
  // the reserved tokens.
  void Save(const std::string& path) const;
  static Vocabulary Load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  void AddToken(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  std::vector<Merge> merges_;
  int num_base_units_ = 0;
  size_t max_token_bytes_ = 0;
};

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> SplitWords(std::string_view text);

}  // namespace dualasr

#endif  // DUALASR_TOKENIZER_VOCABULARY_H_
