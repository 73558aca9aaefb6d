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


#include "dualasr/decoding/hypothesis_file.h"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dualasr {

void WriteHypotheses(const std::string& path, const std::vector<UtteranceHypotheses>& hyps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write hypotheses to " + path);
  char score[64];
  for (size_t i = 0; i < hyps.size(); ++i) {
    if (i > 0) out << "\n";
    for (const auto& h : hyps[i].nbest) {
      std::snprintf(score, sizeof(score), "%.6f", h.score);
      out << hyps[i].id << '\t' << score << '\t' << h.text << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<UtteranceHypotheses> ReadHypotheses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read hypotheses from " + path);
  std::vector<UtteranceHypotheses> hyps;
  bool new_block = true;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      new_block = true;
      continue;
    }
    const size_t a = line.find('\t');
    const size_t b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected id<TAB>score<TAB>text");
    }
    const std::string id = line.substr(0, a);
    if (new_block || hyps.empty() || hyps.back().id != id) {
      hyps.push_back({id, {}});
      new_block = false;
    }
    hyps.back().nbest.push_back({std::stod(line.substr(a + 1, b - a - 1)), line.substr(b + 1)});
  }
  return hyps;
}

}  // namespace dualasr
