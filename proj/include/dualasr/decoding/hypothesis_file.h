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


#ifndef DUALASR_DECODING_HYPOTHESIS_FILE_H_
#define DUALASR_DECODING_HYPOTHESIS_FILE_H_

#include <string>
#include <vector>

namespace dualasr {

struct ScoredText {
  double score = 0.0;
  std::string text;
};

struct UtteranceHypotheses {
  std::string id;
  std::vector<ScoredText> nbest;  // best first
};

// One `id<TAB>score<TAB>text` line per hypothesis; the n-best blocks of
// consecutive utterances are separated by a blank line.
void WriteHypotheses(const std::string& path, const std::vector<UtteranceHypotheses>& hyps);
std::vector<UtteranceHypotheses> ReadHypotheses(const std::string& path);

}  // namespace dualasr

#endif  // DUALASR_DECODING_HYPOTHESIS_FILE_H_
