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


#ifndef DUALASR_CLI_ERRORS_H_
#define DUALASR_CLI_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dualasr {

enum class ErrorCategory {
  kUsage,            // bad command line
  kConfig,           // unknown key, unparsable or inconsistent value
  kMissingArtifact,  // a prerequisite file or stage output is absent
  kData,             // malformed manifest, hypothesis or feature file
  kIo,               // read or write failure
  kNumeric,          // divergence or non-finite values
  kInternal,
};

// Stable lowercase name printed on the error line, e.g. "missing-artifact".
const char* ErrorCategoryName(ErrorCategory category);
// Process exit code; 0 is reserved for success.
int ExitCode(ErrorCategory category);

class CliError : public std::runtime_error {
 public:
  CliError(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

// Maps library exceptions onto a category.
ErrorCategory Classify(const std::exception& e);

// `error[<category>]: <message>` on a single line.
std::string FormatError(const std::exception& e);

}  // namespace dualasr

#endif  // DUALASR_CLI_ERRORS_H_
