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

#ifndef DUALASR_TRANSFORMER_MODEL_H_
#define DUALASR_TRANSFORMER_MODEL_H_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dualasr/corpus/features.h"
#include "dualasr/tensor/tensor.h"

namespace dualasr {

enum class CrossMode { kNone, kSum, kConcat };

const char* CrossModeName(CrossMode mode);
// Accepts "none", "sum" and "concat".
CrossMode ParseCrossMode(const std::string& name);

struct ModelConfig {
  int d_model = 32;
  int n_heads = 2;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int ffn_dim = 64;
  double dropout = 0.1;
  int vocab_size = 200;
  int feat_dim = 16;
  int subsampling = 4;
  CrossMode cross_mode = CrossMode::kNone;
  int max_target_length = 128;

  // 12 encoder layers, 6 layers per decoder, d_model 256, 4 heads, 2048
  // feed-forward units, vocabulary 5000, 83-dim input.
  static ModelConfig FullScale();

  // Throws std::invalid_argument on inconsistent values.
  void Validate() const;
  // Stable `key=value` lines, used by checkpoints.
  std::string Serialize() const;
  static ModelConfig Deserialize(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

// Length after the two stride-2 convolution stages (kernel 3, padding 1):
// ceil(ceil(T / 2) / 2). Any T >= 1 is accepted.
int SubsampledLength(int frames);

enum class DecoderKind { kAsr, kSubtitle };
enum class Component { kEncoder };

template <typename T>
struct EncoderOutput {
  Tensor<T> states;  // [T'_padded x d_model]
  int length = 0;    // valid frames; rows at and beyond are padding
};

template <typename T>
struct CrossLogits {
  Tensor<T> asr;
  Tensor<T> subtitle;
};

// Shared-encoder model with an ASR decoder, a subtitle decoder and a CTC
// head, optionally with cross-attention between the decoders.
//
// Pre-norm transformer blocks with ReLU feed-forward layers, sinusoidal
// positions and a final layer norm per stack.
template <typename T>
class DualDecoderModel {
 public:
  using Params = std::vector<std::pair<std::string, Tensor<T>>>;

  DualDecoderModel(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  // Parameters in a fixed registration order.
  const Params& parameters() const { return params_; }
  Tensor<T>& Param(const std::string& name);
  const Tensor<T>& Param(const std::string& name) const;
  bool HasParam(const std::string& name) const { return index_.count(name) > 0; }
  int64_t NumParameters() const;
  static int64_t CountParameters(const ModelConfig& config);

  // Dropout is active only in training mode. Each forward call draws its
  // dropout masks from `seed` and a per-call counter.
  void SetTraining(bool training, uint64_t seed = 0);
  bool training() const { return training_; }

  // `features` may carry padding rows beyond `length`; they do not affect
  // the states of real frames.
  EncoderOutput<T> Encode(const Features& features, int length) const;
  EncoderOutput<T> Encode(const Features& features) const {
    return Encode(features, features.frames);
  }

  // Per-frame CTC logits [T' x V] over the valid encoder frames.
  Tensor<T> CtcLogits(const EncoderOutput<T>& enc) const;

  // Logits [L x V] for a sos-prefixed input sequence of length L. On a
  // cross-connected model the other decoder sees only its sos position.
  Tensor<T> DecodeTeacherForced(DecoderKind decoder, std::span<const int> input,
                                const EncoderOutput<T>& enc) const;

  // Both decoders in lockstep. Position t of each stream additionally
  // attends to the other stream's layer inputs at positions < t. Throws
  // std::logic_error on a model without cross connections.
  CrossLogits<T> DecodeCrossConnected(std::span<const int> asr_input,
                                      std::span<const int> subtitle_input,
                                      const EncoderOutput<T>& enc) const;

  void Freeze(Component component);
  void Unfreeze(Component component);
  bool IsFrozen(const std::string& param_name) const;

  // Copies the encoder, CTC head and ASR decoder from `asr`; with
  // `subtitle_from_asr` the subtitle decoder is initialized from the ASR
  // decoder, otherwise from `asr`'s subtitle decoder. Cross-connection
  // parameters keep their fresh initialization. Throws std::invalid_argument
  // when the shared dimensions differ.
  void InitializeFrom(const DualDecoderModel& asr, bool subtitle_from_asr);

 private:
  struct Stream;

  void Register(const std::string& name, Shape shape, std::vector<T> values);
  void RegisterLinear(const std::string& name, int in, int out, uint64_t seed);
  void RegisterNorm(const std::string& name, int dim);
  void RegisterAttention(const std::string& name, uint64_t seed);

  Tensor<T> Linear(const Tensor<T>& x, const std::string& name) const;
  Tensor<T> Norm(const Tensor<T>& x, const std::string& name) const;
  Tensor<T> FeedForward(const Tensor<T>& x, const std::string& name) const;
  Tensor<T> Attention(const Tensor<T>& query, const Tensor<T>& memory,
                      std::span<const uint8_t> mask, const std::string& name) const;
  Tensor<T> Drop(const Tensor<T>& x) const;
  Tensor<T> PositionalEncoding(int length) const;
  Tensor<T> Embed(const std::string& prefix, std::span<const int> ids) const;
  void DecoderLayer(Stream& self, const Tensor<T>* other_input, int other_length,
                    const EncoderOutput<T>& enc, int layer) const;
  Tensor<T> FinishStream(const Stream& s) const;

  ModelConfig config_;
  Params params_;
  std::map<std::string, size_t> index_;
  std::set<std::string> frozen_prefixes_;
  bool training_ = false;
  uint64_t dropout_seed_ = 0;
  mutable uint64_t dropout_calls_ = 0;
};

}  // namespace dualasr

#endif  // DUALASR_TRANSFORMER_MODEL_H_
