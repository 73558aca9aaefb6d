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


#ifndef DUALASR_TRAINING_CHECKPOINT_H_
#define DUALASR_TRAINING_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualasr/training/optimizer.h"
#include "dualasr/transformer/model.h"

namespace dualasr {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationMetrics {
  double asr_accuracy = 0.0;  // teacher-forced, non-pad positions
  double asr_loss = 0.0;      // hybrid CTC/attention loss
  double train_loss = 0.0;    // mean L_tot of the epoch
};

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  static constexpr uint32_t kFormatVersion = 1;

  ModelConfig config;
  std::vector<NamedTensor> tensors;  // model registration order
  int64_t optimizer_steps = 0;
  std::map<std::string, AdamMoments> moments;
  int epoch = 0;
  ValidationMetrics metrics;
};

Checkpoint CaptureCheckpoint(const DualDecoderModel<double>& model, const Adam* optimizer,
                             int epoch, const ValidationMetrics& metrics);

// Copies the tensors into `model`; throws CheckpointError when the config or
// any tensor name or shape differs.
void RestoreModel(const Checkpoint& checkpoint, DualDecoderModel<double>& model);
DualDecoderModel<double> ModelFromCheckpoint(const Checkpoint& checkpoint);

// Little-endian binary file: magic, format version, config text, epoch,
// metrics, optimizer state and a directory of named tensors.
void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);
// Also rejects a checkpoint whose config differs from `expected`.
Checkpoint LoadCheckpoint(const std::string& path, const ModelConfig& expected);

// Elementwise mean of the parameters. Optimizer state is dropped.
Checkpoint AverageCheckpoints(const std::vector<Checkpoint>& checkpoints);

// Indices of the `k` best checkpoints by validation ASR accuracy; equal
// accuracies go to the lower epoch.
std::vector<size_t> SelectTopK(const std::vector<Checkpoint>& checkpoints, int k);

}  // namespace dualasr

#endif  // DUALASR_TRAINING_CHECKPOINT_H_
