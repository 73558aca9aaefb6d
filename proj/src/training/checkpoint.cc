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


#include "dualasr/training/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace dualasr {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'S', 'R', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void U32(uint32_t v) { Bytes(v, 4); }
  void U64(uint64_t v) { Bytes(v, 8); }
  void I64(int64_t v) { U64(static_cast<uint64_t>(v)); }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Str(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void Doubles(const std::vector<double>& v) {
    U64(v.size());
    for (double x : v) F64(x);
  }

 private:
  void Bytes(uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  uint32_t U32() { return static_cast<uint32_t>(Bytes(4)); }
  uint64_t U64() { return Bytes(8); }
  int64_t I64() { return static_cast<int64_t>(U64()); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const uint32_t n = U32();
    Limit(n);
    std::string s(n, '\0');
    Read(s.data(), n);
    return s;
  }
  std::vector<double> Doubles() {
    const uint64_t n = U64();
    Limit(n * 8);
    std::vector<double> v(n);
    for (double& x : v) x = F64();
    return v;
  }
  void Read(char* dst, size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw CheckpointError("truncated checkpoint " + path_);
    }
  }

 private:
  uint64_t Bytes(int n) {
    unsigned char buf[8];
    Read(reinterpret_cast<char*>(buf), n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  void Limit(uint64_t bytes) {
    if (bytes > (uint64_t{1} << 34)) throw CheckpointError("corrupt checkpoint " + path_);
  }
  std::istream& in_;
  std::string path_;
};

}  // namespace

Checkpoint CaptureCheckpoint(const DualDecoderModel<double>& model, const Adam* optimizer,
                             int epoch, const ValidationMetrics& metrics) {
  Checkpoint c;
  c.config = model.config();
  for (const auto& [name, p] : model.parameters()) {
    c.tensors.push_back({name, p.shape(), std::vector<double>(p.data().begin(), p.data().end())});
  }
  if (optimizer) {
    c.optimizer_steps = optimizer->steps();
    c.moments = optimizer->moments();
  }
  c.epoch = epoch;
  c.metrics = metrics;
  return c;
}

void RestoreModel(const Checkpoint& checkpoint, DualDecoderModel<double>& model) {
  if (!(checkpoint.config == model.config())) {
    throw CheckpointError("checkpoint model config does not match");
  }
  if (checkpoint.tensors.size() != model.parameters().size()) {
    throw CheckpointError("checkpoint tensor count does not match the model");
  }
  for (const auto& t : checkpoint.tensors) {
    if (!model.HasParam(t.name)) throw CheckpointError("unknown tensor " + t.name);
    auto& p = model.Param(t.name);
    if (p.shape() != t.shape) throw CheckpointError("shape mismatch for " + t.name);
    std::copy(t.values.begin(), t.values.end(), p.mutable_data().begin());
  }
}

DualDecoderModel<double> ModelFromCheckpoint(const Checkpoint& checkpoint) {
  DualDecoderModel<double> model(checkpoint.config, 0);
  RestoreModel(checkpoint, model);
  return model;
}

void SaveCheckpoint(const Checkpoint& c, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + tmp);
    Writer w(out);
    out.write(kMagic, sizeof(kMagic));
    w.U32(Checkpoint::kFormatVersion);
    w.Str(c.config.Serialize());
    w.I64(c.epoch);
    w.F64(c.metrics.asr_accuracy);
    w.F64(c.metrics.asr_loss);
    w.F64(c.metrics.train_loss);
    w.U32(static_cast<uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
      w.Str(t.name);
      w.U32(static_cast<uint32_t>(t.shape.size()));
      for (int d : t.shape) w.U32(static_cast<uint32_t>(d));
      w.Doubles(t.values);
    }
    w.I64(c.optimizer_steps);
    w.U32(static_cast<uint32_t>(c.moments.size()));
    for (const auto& [name, m] : c.moments) {
      w.Str(name);
      w.Doubles(m.m);
      w.Doubles(m.v);
    }
    if (!out) throw CheckpointError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw CheckpointError("cannot move checkpoint into place: " + path);
  }
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  Reader r(in, path);
  char magic[sizeof(kMagic)];
  r.Read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path + " is not a checkpoint");
  }
  const uint32_t version = r.U32();
  if (version != Checkpoint::kFormatVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  Checkpoint c;
  try {
    c.config = ModelConfig::Deserialize(r.Str());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("bad model config in checkpoint: ") + e.what());
  }
  c.epoch = static_cast<int>(r.I64());
  c.metrics.asr_accuracy = r.F64();
  c.metrics.asr_loss = r.F64();
  c.metrics.train_loss = r.F64();
  const uint32_t n = r.U32();
  for (uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = r.Str();
    const uint32_t rank = r.U32();
    if (rank > 8) throw CheckpointError("corrupt checkpoint " + path);
    for (uint32_t k = 0; k < rank; ++k) t.shape.push_back(static_cast<int>(r.U32()));
    t.values = r.Doubles();
    if (static_cast<int64_t>(t.values.size()) != NumElements(t.shape)) {
      throw CheckpointError("tensor size mismatch for " + t.name);
    }
    c.tensors.push_back(std::move(t));
  }
  c.optimizer_steps = r.I64();
  const uint32_t m = r.U32();
  for (uint32_t i = 0; i < m; ++i) {
    const std::string name = r.Str();
    AdamMoments mom;
    mom.m = r.Doubles();
    mom.v = r.Doubles();
    c.moments.emplace(name, std::move(mom));
  }
  return c;
}

Checkpoint LoadCheckpoint(const std::string& path, const ModelConfig& expected) {
  Checkpoint c = LoadCheckpoint(path);
  if (!(c.config == expected)) {
    throw CheckpointError("checkpoint " + path + " was written for a different model config");
  }
  return c;
}

Checkpoint AverageCheckpoints(const std::vector<Checkpoint>& checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("no checkpoints to average");
  const Checkpoint& first = checkpoints[0];
  for (const auto& c : checkpoints) {
    if (!(c.config == first.config)) {
      throw CheckpointError("cannot average checkpoints with different model configs");
    }
    if (c.tensors.size() != first.tensors.size()) {
      throw CheckpointError("cannot average checkpoints with different tensors");
    }
    for (size_t i = 0; i < c.tensors.size(); ++i) {
      if (c.tensors[i].name != first.tensors[i].name ||
          c.tensors[i].shape != first.tensors[i].shape) {
        throw CheckpointError("tensor mismatch at " + first.tensors[i].name);
      }
    }
  }
  Checkpoint avg;
  avg.config = first.config;
  avg.epoch = first.epoch;
  const double k = static_cast<double>(checkpoints.size());
  for (size_t i = 0; i < first.tensors.size(); ++i) {
    NamedTensor t = first.tensors[i];
    // first + mean of differences: exact for identical inputs.
    for (size_t j = 0; j < t.values.size(); ++j) {
      double diff = 0.0;
      for (size_t c = 1; c < checkpoints.size(); ++c) {
        diff += checkpoints[c].tensors[i].values[j] - first.tensors[i].values[j];
      }
      t.values[j] = first.tensors[i].values[j] + diff / k;
    }
    avg.tensors.push_back(std::move(t));
  }
  for (const auto& c : checkpoints) {
    avg.metrics.asr_accuracy += c.metrics.asr_accuracy / k;
    avg.metrics.asr_loss += c.metrics.asr_loss / k;
    avg.metrics.train_loss += c.metrics.train_loss / k;
  }
  return avg;
}

std::vector<size_t> SelectTopK(const std::vector<Checkpoint>& checkpoints, int k) {
  std::vector<size_t> order(checkpoints.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& x = checkpoints[a];
    const auto& y = checkpoints[b];
    if (x.metrics.asr_accuracy != y.metrics.asr_accuracy) {
      return x.metrics.asr_accuracy > y.metrics.asr_accuracy;
    }
    return x.epoch < y.epoch;
  });
  if (k >= 0 && static_cast<size_t>(k) < order.size()) order.resize(k);
  return order;
}

}  // namespace dualasr
