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


#include "dualasr/cli/errors.h"

#include <algorithm>

#include "dualasr/tensor/tensor.h"
#include "dualasr/training/checkpoint.h"

namespace dualasr {

const char* ErrorCategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return "usage";
    case ErrorCategory::kConfig:
      return "config";
    case ErrorCategory::kMissingArtifact:
      return "missing-artifact";
    case ErrorCategory::kData:
      return "data";
    case ErrorCategory::kIo:
      return "io";
    case ErrorCategory::kNumeric:
      return "numeric";
    case ErrorCategory::kInternal:
      return "internal";
  }
  return "internal";
}

int ExitCode(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return 2;
    case ErrorCategory::kConfig:
      return 3;
    case ErrorCategory::kMissingArtifact:
      return 4;
    case ErrorCategory::kData:
      return 5;
    case ErrorCategory::kIo:
      return 6;
    case ErrorCategory::kNumeric:
      return 7;
    case ErrorCategory::kInternal:
      return 1;
  }
  return 1;
}

ErrorCategory Classify(const std::exception& e) {
  if (const auto* cli = dynamic_cast<const CliError*>(&e)) return cli->category();
  if (dynamic_cast<const NumericError*>(&e)) return ErrorCategory::kNumeric;
  if (dynamic_cast<const CheckpointError*>(&e)) return ErrorCategory::kData;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return ErrorCategory::kConfig;
  if (dynamic_cast<const std::runtime_error*>(&e)) return ErrorCategory::kData;
  return ErrorCategory::kInternal;
}

std::string FormatError(const std::exception& e) {
  std::string message = e.what();
  std::replace(message.begin(), message.end(), '\n', ' ');
  return std::string("error[") + ErrorCategoryName(Classify(e)) + "]: " + message;
}

}  // namespace dualasr
