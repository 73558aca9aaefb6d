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

#include "dualasr/transformer/model.h"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dualasr/common/seed.h"
#include "dualasr/tensor/ops.h"
#include "dualasr/tokenizer/vocabulary.h"

namespace dualasr {

namespace {

bool StartsWith(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

std::vector<uint8_t> CausalMask(int len) {
  std::vector<uint8_t> mask(static_cast<size_t>(len) * len, 0);
  for (int t = 0; t < len; ++t) {
    for (int j = 0; j <= t; ++j) mask[t * len + j] = 1;
  }
  return mask;
}

// Query row t may see key j when j < t.
std::vector<uint8_t> StrictlyPreviousMask(int queries, int keys) {
  std::vector<uint8_t> mask(static_cast<size_t>(queries) * keys, 0);
  for (int t = 0; t < queries; ++t) {
    for (int j = 0; j < std::min(t, keys); ++j) mask[t * keys + j] = 1;
  }
  return mask;
}

std::vector<uint8_t> KeyLengthMask(int queries, int keys, int valid) {
  std::vector<uint8_t> mask(static_cast<size_t>(queries) * keys, 0);
  for (int t = 0; t < queries; ++t) {
    for (int j = 0; j < std::min(valid, keys); ++j) mask[t * keys + j] = 1;
  }
  return mask;
}

// Rows at and beyond `valid` set to 1.
std::vector<uint8_t> RowMask(int rows, int cols, int valid) {
  std::vector<uint8_t> mask(static_cast<size_t>(rows) * cols, 0);
  for (int r = valid; r < rows; ++r) {
    std::fill(mask.begin() + static_cast<size_t>(r) * cols,
              mask.begin() + static_cast<size_t>(r + 1) * cols, 1);
  }
  return mask;
}

}  // namespace

const char* CrossModeName(CrossMode mode) {
  switch (mode) {
    case CrossMode::kNone:
      return "none";
    case CrossMode::kSum:
      return "sum";
    case CrossMode::kConcat:
      return "concat";
  }
  return "?";
}

CrossMode ParseCrossMode(const std::string& name) {
  if (name == "none") return CrossMode::kNone;
  if (name == "sum") return CrossMode::kSum;
  if (name == "concat") return CrossMode::kConcat;
  throw std::invalid_argument("unknown cross mode '" + name + "'");
}

ModelConfig ModelConfig::FullScale() {
  ModelConfig c;
  c.d_model = 256;
  c.n_heads = 4;
  c.encoder_layers = 12;
  c.decoder_layers = 6;
  c.ffn_dim = 2048;
  c.vocab_size = Vocabulary::kFullScaleVocabSize;
  c.feat_dim = 83;
  return c;
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("model config: " + what);
  };
  require(d_model >= 1 && n_heads >= 1, "d_model and n_heads must be positive");
  require(d_model % n_heads == 0, "d_model must be divisible by n_heads");
  require(encoder_layers >= 0 && decoder_layers >= 1, "invalid layer counts");
  require(ffn_dim >= 1, "ffn_dim must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(vocab_size > Vocabulary::kNumReserved, "vocab_size too small");
  require(feat_dim >= 1, "feat_dim must be positive");
  require(subsampling == 4, "only subsampling factor 4 is implemented");
  require(max_target_length >= 1, "max_target_length must be positive");
}

std::string ModelConfig::Serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "d_model=" << d_model << "\nn_heads=" << n_heads
      << "\nencoder_layers=" << encoder_layers << "\ndecoder_layers=" << decoder_layers
      << "\nffn_dim=" << ffn_dim << "\ndropout=" << dropout << "\nvocab_size=" << vocab_size
      << "\nfeat_dim=" << feat_dim << "\nsubsampling=" << subsampling
      << "\ncross_mode=" << CrossModeName(cross_mode)
      << "\nmax_target_length=" << max_target_length << "\n";
  return out.str();
}

ModelConfig ModelConfig::Deserialize(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad model config line: " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "d_model") c.d_model = std::stoi(value);
    else if (key == "n_heads") c.n_heads = std::stoi(value);
    else if (key == "encoder_layers") c.encoder_layers = std::stoi(value);
    else if (key == "decoder_layers") c.decoder_layers = std::stoi(value);
    else if (key == "ffn_dim") c.ffn_dim = std::stoi(value);
    else if (key == "dropout") c.dropout = std::stod(value);
    else if (key == "vocab_size") c.vocab_size = std::stoi(value);
    else if (key == "feat_dim") c.feat_dim = std::stoi(value);
    else if (key == "subsampling") c.subsampling = std::stoi(value);
    else if (key == "cross_mode") c.cross_mode = ParseCrossMode(value);
    else if (key == "max_target_length") c.max_target_length = std::stoi(value);
    else throw std::invalid_argument("unknown model config key '" + key + "'");
  }
  c.Validate();
  return c;
}

int SubsampledLength(int frames) {
  if (frames < 1) throw std::invalid_argument("need at least one input frame");
  const int half = (frames + 1) / 2;
  return (half + 1) / 2;
}

template <typename T>
struct DualDecoderModel<T>::Stream {
  std::string prefix;
  Tensor<T> x;
  int length = 0;
};

template <typename T>
DualDecoderModel<T>::DualDecoderModel(const ModelConfig& config, uint64_t seed)
    : config_(config) {
  config_.Validate();
  const int d = config_.d_model, V = config_.vocab_size;
  uint64_t counter = 0;
  auto next = [&] { return DeriveSeed(seed, {counter++}); };

  RegisterLinear("sub.conv1", 3 * config_.feat_dim, d, next());
  RegisterLinear("sub.conv2", 3 * d, d, next());
  RegisterLinear("sub.out", d, d, next());
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    RegisterNorm(p + ".ln1", d);
    RegisterAttention(p + ".att", next());
    RegisterNorm(p + ".ln2", d);
    RegisterLinear(p + ".ffn.l1", d, config_.ffn_dim, next());
    RegisterLinear(p + ".ffn.l2", config_.ffn_dim, d, next());
  }
  RegisterNorm("enc.ln", d);
  RegisterLinear("ctc", d, V, next());

  for (const std::string dec : {"asr_dec", "sub_dec"}) {
    std::mt19937_64 rng(next());
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(d));
    std::vector<T> emb(static_cast<size_t>(V) * d);
    for (T& v : emb) v = static_cast<T>(normal(rng));
    Register(dec + ".emb", {V, d}, std::move(emb));
    for (int l = 0; l < config_.decoder_layers; ++l) {
      const std::string p = dec + "." + std::to_string(l);
      RegisterNorm(p + ".ln1", d);
      RegisterAttention(p + ".self", next());
      if (config_.cross_mode != CrossMode::kNone) {
        RegisterAttention(p + ".cross", next());
        if (config_.cross_mode == CrossMode::kSum) {
          std::fill(Param(p + ".cross.o.w").mutable_data().begin(),
                    Param(p + ".cross.o.w").mutable_data().end(), T(0));
        } else {
          std::vector<T> merge(static_cast<size_t>(2 * d) * d, T(0));
          for (int i = 0; i < d; ++i) merge[static_cast<size_t>(i) * d + i] = T(1);
          Register(p + ".merge.w", {2 * d, d}, std::move(merge));
          Register(p + ".merge.b", {d}, std::vector<T>(d, T(0)));
        }
      }
      RegisterNorm(p + ".ln2", d);
      RegisterAttention(p + ".src", next());
      RegisterNorm(p + ".ln3", d);
      RegisterLinear(p + ".ffn.l1", d, config_.ffn_dim, next());
      RegisterLinear(p + ".ffn.l2", config_.ffn_dim, d, next());
    }
    RegisterNorm(dec + ".ln", d);
    RegisterLinear(dec + ".out", d, V, next());
  }
}

template <typename T>
void DualDecoderModel<T>::Register(const std::string& name, Shape shape,
                                   std::vector<T> values) {
  if (index_.count(name)) throw std::logic_error("duplicate parameter " + name);
  index_[name] = params_.size();
  params_.emplace_back(name, Tensor<T>::Parameter(shape, std::move(values)));
}

template <typename T>
void DualDecoderModel<T>::RegisterLinear(const std::string& name, int in, int out,
                                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double a = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> uniform(-a, a);
  std::vector<T> w(static_cast<size_t>(in) * out);
  for (T& v : w) v = static_cast<T>(uniform(rng));
  Register(name + ".w", {in, out}, std::move(w));
  Register(name + ".b", {out}, std::vector<T>(out, T(0)));
}

template <typename T>
void DualDecoderModel<T>::RegisterNorm(const std::string& name, int dim) {
  Register(name + ".g", {dim}, std::vector<T>(dim, T(1)));
  Register(name + ".b", {dim}, std::vector<T>(dim, T(0)));
}

template <typename T>
void DualDecoderModel<T>::RegisterAttention(const std::string& name, uint64_t seed) {
  const int d = config_.d_model;
  for (const char* part : {"q", "k", "v", "o"}) {
    RegisterLinear(name + "." + part, d, d, DeriveSeed(seed, {static_cast<uint64_t>(*part)}));
  }
}

template <typename T>
Tensor<T>& DualDecoderModel<T>::Param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second].second;
}

template <typename T>
const Tensor<T>& DualDecoderModel<T>::Param(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second].second;
}

template <typename T>
int64_t DualDecoderModel<T>::NumParameters() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p.numel();
  return n;
}

template <typename T>
int64_t DualDecoderModel<T>::CountParameters(const ModelConfig& c) {
  const int64_t d = c.d_model, f = c.ffn_dim, V = c.vocab_size, F = c.feat_dim;
  const int64_t linear_dd = d * d + d;
  const int64_t attention = 4 * linear_dd;
  const int64_t ffn = d * f + f + f * d + d;
  const int64_t norm = 2 * d;
  const int64_t subsampler = (3 * F * d + d) + (3 * d * d + d) + linear_dd;
  const int64_t encoder = c.encoder_layers * (attention + ffn + 2 * norm) + norm;
  const int64_t ctc = d * V + V;
  int64_t cross = 0;
  if (c.cross_mode == CrossMode::kSum) cross = attention;
  if (c.cross_mode == CrossMode::kConcat) cross = attention + 2 * d * d + d;
  const int64_t decoder = V * d + c.decoder_layers * (2 * attention + ffn + 3 * norm + cross) +
                          norm + d * V + V;
  return subsampler + encoder + ctc + 2 * decoder;
}

template <typename T>
void DualDecoderModel<T>::SetTraining(bool training, uint64_t seed) {
  training_ = training;
  dropout_seed_ = seed;
  dropout_calls_ = 0;
}

template <typename T>
Tensor<T> DualDecoderModel<T>::Linear(const Tensor<T>& x, const std::string& name) const {
  return Add(MatMul(x, Param(name + ".w")), Param(name + ".b"));
}

template <typename T>
Tensor<T> DualDecoderModel<T>::Norm(const Tensor<T>& x, const std::string& name) const {
  return LayerNorm(x, Param(name + ".g"), Param(name + ".b"), static_cast<T>(1e-5));
}

template <typename T>
Tensor<T> DualDecoderModel<T>::FeedForward(const Tensor<T>& x, const std::string& name) const {
  return Linear(Drop(Relu(Linear(x, name + ".l1"))), name + ".l2");
}

template <typename T>
Tensor<T> DualDecoderModel<T>::Drop(const Tensor<T>& x) const {
  if (!training_ || config_.dropout <= 0.0) return x;
  return Dropout(x, static_cast<T>(config_.dropout),
                 DeriveSeed(dropout_seed_, {dropout_calls_++}));
}

template <typename T>
Tensor<T> DualDecoderModel<T>::Attention(const Tensor<T>& query, const Tensor<T>& memory,
                                         std::span<const uint8_t> mask,
                                         const std::string& name) const {
  const int d = config_.d_model, heads = config_.n_heads, dk = d / heads;
  const Tensor<T> q = Linear(query, name + ".q");
  const Tensor<T> k = Linear(memory, name + ".k");
  const Tensor<T> v = Linear(memory, name + ".v");
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
  std::vector<Tensor<T>> outputs;
  for (int h = 0; h < heads; ++h) {
    const Tensor<T> qh = heads == 1 ? q : Slice(q, 1, h * dk, (h + 1) * dk);
    const Tensor<T> kh = heads == 1 ? k : Slice(k, 1, h * dk, (h + 1) * dk);
    const Tensor<T> vh = heads == 1 ? v : Slice(v, 1, h * dk, (h + 1) * dk);
    const Tensor<T> weights = MaskedSoftmax(Scale(MatMul(qh, Transpose(kh)), scale), mask);
    outputs.push_back(MatMul(weights, vh));
  }
  return Linear(heads == 1 ? outputs[0] : Concat(outputs, 1), name + ".o");
}

template <typename T>
Tensor<T> DualDecoderModel<T>::PositionalEncoding(int length) const {
  const int d = config_.d_model;
  std::vector<T> pe(static_cast<size_t>(length) * d);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
      pe[static_cast<size_t>(pos) * d + i] = static_cast<T>(std::sin(angle));
      if (i + 1 < d) pe[static_cast<size_t>(pos) * d + i + 1] = static_cast<T>(std::cos(angle));
    }
  }
  return Tensor<T>::FromData({length, d}, std::move(pe));
}

template <typename T>
EncoderOutput<T> DualDecoderModel<T>::Encode(const Features& features, int length) const {
  if (features.dim != config_.feat_dim) {
    throw ShapeError("expected " + std::to_string(config_.feat_dim) +
                     "-dim features, got " + std::to_string(features.dim));
  }
  if (length < 1 || length > features.frames) {
    throw std::invalid_argument("invalid utterance length " + std::to_string(length));
  }
  const int d = config_.d_model, F = features.dim;
  std::vector<T> input(static_cast<size_t>(features.frames) * F, T(0));
  for (size_t i = 0; i < static_cast<size_t>(length) * F; ++i) {
    input[i] = static_cast<T>(features.data[i]);
  }
  Tensor<T> x = Tensor<T>::FromData({features.frames, F}, std::move(input));

  Tensor<T> h = Relu(Linear(UnfoldTime(x, 3, 2, 1), "sub.conv1"));
  const int valid1 = (length + 1) / 2;
  if (valid1 < h.dim(0)) h = MaskedFill(h, RowMask(h.dim(0), d, valid1), T(0));
  h = Relu(Linear(UnfoldTime(h, 3, 2, 1), "sub.conv2"));
  const int valid = (valid1 + 1) / 2;
  if (valid < h.dim(0)) h = MaskedFill(h, RowMask(h.dim(0), d, valid), T(0));
  const int frames = h.dim(0);
  h = Linear(h, "sub.out");
  h = Drop(Add(h, PositionalEncoding(frames)));

  const std::vector<uint8_t> mask = KeyLengthMask(frames, frames, valid);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    const Tensor<T> a = Norm(h, p + ".ln1");
    h = Add(h, Drop(Attention(a, a, mask, p + ".att")));
    h = Add(h, Drop(FeedForward(Norm(h, p + ".ln2"), p + ".ffn")));
  }
  return {Norm(h, "enc.ln"), valid};
}

template <typename T>
Tensor<T> DualDecoderModel<T>::CtcLogits(const EncoderOutput<T>& enc) const {
  const Tensor<T> states =
      enc.length == enc.states.dim(0) ? enc.states : Slice(enc.states, 0, 0, enc.length);
  return Linear(states, "ctc");
}

template <typename T>
Tensor<T> DualDecoderModel<T>::Embed(const std::string& prefix,
                                     std::span<const int> ids) const {
  if (ids.empty()) throw std::invalid_argument("decoder input is empty");
  if (ids[0] != Vocabulary::kSos) throw std::invalid_argument("decoder input must start with sos");
  if (static_cast<int>(ids.size()) > config_.max_target_length + 1) {
    throw std::invalid_argument("target longer than max_target_length");
  }
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) throw std::out_of_range("token id out of range");
  }
  const int d = config_.d_model;
  const Tensor<T> e = EmbeddingLookup(Param(prefix + ".emb"), ids);
  return Drop(Add(Scale(e, static_cast<T>(std::sqrt(static_cast<double>(d)))),
                  PositionalEncoding(static_cast<int>(ids.size()))));
}

template <typename T>
void DualDecoderModel<T>::DecoderLayer(Stream& s, const Tensor<T>* other_input,
                                       int other_length, const EncoderOutput<T>& enc,
                                       int layer) const {
  const std::string p = s.prefix + "." + std::to_string(layer);
  const Tensor<T> h = Norm(s.x, p + ".ln1");
  Tensor<T> a = Attention(h, h, CausalMask(s.length), p + ".self");
  if (other_input != nullptr) {
    const Tensor<T> c = Attention(h, *other_input, StrictlyPreviousMask(s.length, other_length),
                                  p + ".cross");
    a = config_.cross_mode == CrossMode::kSum ? Add(a, c) : Linear(Concat(std::vector<Tensor<T>>{a, c}, 1), p + ".merge");
  }
  s.x = Add(s.x, Drop(a));
  s.x = Add(s.x, Drop(Attention(Norm(s.x, p + ".ln2"), enc.states,
                                KeyLengthMask(s.length, enc.states.dim(0), enc.length),
                                p + ".src")));
  s.x = Add(s.x, Drop(FeedForward(Norm(s.x, p + ".ln3"), p + ".ffn")));
}

template <typename T>
Tensor<T> DualDecoderModel<T>::FinishStream(const Stream& s) const {
  return Linear(Norm(s.x, s.prefix + ".ln"), s.prefix + ".out");
}

template <typename T>
Tensor<T> DualDecoderModel<T>::DecodeTeacherForced(DecoderKind decoder,
                                                   std::span<const int> input,
                                                   const EncoderOutput<T>& enc) const {
  if (config_.cross_mode != CrossMode::kNone) {
    const int sos[] = {Vocabulary::kSos};
    if (decoder == DecoderKind::kAsr) return DecodeCrossConnected(input, sos, enc).asr;
    return DecodeCrossConnected(sos, input, enc).subtitle;
  }
  Stream s{decoder == DecoderKind::kAsr ? "asr_dec" : "sub_dec", Tensor<T>(),
           static_cast<int>(input.size())};
  s.x = Embed(s.prefix, input);
  for (int l = 0; l < config_.decoder_layers; ++l) DecoderLayer(s, nullptr, 0, enc, l);
  return FinishStream(s);
}

template <typename T>
CrossLogits<T> DualDecoderModel<T>::DecodeCrossConnected(std::span<const int> asr_input,
                                                         std::span<const int> subtitle_input,
                                                         const EncoderOutput<T>& enc) const {
  if (config_.cross_mode == CrossMode::kNone) {
    throw std::logic_error("model has no cross connections");
  }
  Stream a{"asr_dec", Embed("asr_dec", asr_input), static_cast<int>(asr_input.size())};
  Stream b{"sub_dec", Embed("sub_dec", subtitle_input),
           static_cast<int>(subtitle_input.size())};
  for (int l = 0; l < config_.decoder_layers; ++l) {
    const Tensor<T> a_in = a.x, b_in = b.x;
    DecoderLayer(a, &b_in, b.length, enc, l);
    DecoderLayer(b, &a_in, a.length, enc, l);
  }
  return {FinishStream(a), FinishStream(b)};
}

template <typename T>
void DualDecoderModel<T>::Freeze(Component component) {
  if (component == Component::kEncoder) {
    frozen_prefixes_.insert("sub.");
    frozen_prefixes_.insert("enc.");
  }
}

template <typename T>
void DualDecoderModel<T>::Unfreeze(Component component) {
  if (component == Component::kEncoder) {
    frozen_prefixes_.erase("sub.");
    frozen_prefixes_.erase("enc.");
  }
}

template <typename T>
bool DualDecoderModel<T>::IsFrozen(const std::string& param_name) const {
  for (const auto& p : frozen_prefixes_) {
    if (StartsWith(param_name, p)) return true;
  }
  return false;
}

template <typename T>
void DualDecoderModel<T>::InitializeFrom(const DualDecoderModel& asr, bool subtitle_from_asr) {
  for (auto& [name, param] : params_) {
    if (name.find(".cross.") != std::string::npos || name.find(".merge.") != std::string::npos) {
      continue;
    }
    std::string source = name;
    if (subtitle_from_asr && StartsWith(name, "sub_dec.")) {
      source = "asr_dec." + name.substr(8);
    }
    if (!asr.HasParam(source)) {
      throw std::invalid_argument("initialization source lacks parameter " + source);
    }
    const Tensor<T>& src = asr.Param(source);
    if (src.shape() != param.shape()) {
      throw std::invalid_argument("shape mismatch for " + name + ": " +
                                  ShapeString(src.shape()) + " vs " +
                                  ShapeString(param.shape()));
    }
    std::copy(src.data().begin(), src.data().end(), param.mutable_data().begin());
  }
}

template class DualDecoderModel<float>;
template class DualDecoderModel<double>;

}  // namespace dualasr
