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

#include "dualasr/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "Eigen/Core"

namespace dualasr {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMajor<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMajor<T>>;

namespace {

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

// Splits a shape around `axis` into (outer, axis, inner) extents.
struct AxisSplit {
  int64_t outer = 1;
  int64_t extent = 1;
  int64_t inner = 1;
};

AxisSplit SplitAt(const Shape& shape, int axis) {
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

int NormalizeAxis(int axis, int rank) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) throw ShapeError("axis out of range");
  return axis;
}

void Require2D(const Shape& s, const char* op) {
  if (s.size() != 2) {
    throw ShapeError(std::string(op) + " expects a 2-D tensor, got " +
                     ShapeString(s));
  }
}

// Row broadcast rule shared by Add and Mul.
bool IsRowBroadcast(const Shape& a, const Shape& b) {
  return b.size() == 1 && !a.empty() && a.back() == b[0] && a != b;
}

}  // namespace

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b) {
  Require2D(a.shape(), "MatMul");
  Require2D(b.shape(), "MatMul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("MatMul inner dimensions differ: " +
                     ShapeString(a.shape()) + " * " + ShapeString(b.shape()));
  }
  std::vector<T> out(static_cast<size_t>(m) * n);
  MatrixMap<T>(out.data(), m, n).noalias() =
      ConstMatrixMap<T>(a.data().data(), m, k) * ConstMatrixMap<T>(b.data().data(), k, n);
  return MakeOpResult<T>(
      "MatMul", {m, n}, std::move(out), {&a, &b},
      [an = a.node_ptr(), bn = b.node_ptr(), m, k, n](Tape<T>& tape,
                                                      Node<T>& self) {
        const ConstMatrixMap<T> g(self.grad.data(), m, n);
        if (an->requires_grad) {
          MatrixMap<T>(tape.GradOf(an.get()).data(), m, k).noalias() +=
              g * ConstMatrixMap<T>(bn->value.data(), k, n).transpose();
        }
        if (bn->requires_grad) {
          MatrixMap<T>(tape.GradOf(bn.get()).data(), k, n).noalias() +=
              ConstMatrixMap<T>(an->value.data(), m, k).transpose() * g;
        }
      });
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  const bool broadcast = IsRowBroadcast(a.shape(), b.shape());
  if (!broadcast && a.shape() != b.shape()) {
    throw ShapeError("Add shape mismatch: " + ShapeString(a.shape()) + " + " +
                     ShapeString(b.shape()));
  }
  const auto av = a.data();
  const auto bv = b.data();
  const size_t nb = bv.size();
  std::vector<T> out(av.size());
  for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i % nb];
  return MakeOpResult<T>(
      "Add", a.shape(), std::move(out), {&a, &b},
      [an = a.node_ptr(), bn = b.node_ptr(), nb](Tape<T>& tape,
                                                 Node<T>& self) {
        const auto& g = self.grad;
        if (an->requires_grad) {
          auto& ga = tape.GradOf(an.get());
          for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (bn->requires_grad) {
          auto& gb = tape.GradOf(bn.get());
          for (size_t i = 0; i < g.size(); ++i) gb[i % nb] += g[i];
        }
      });
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  const bool broadcast = IsRowBroadcast(a.shape(), b.shape());
  if (!broadcast && a.shape() != b.shape()) {
    throw ShapeError("Mul shape mismatch: " + ShapeString(a.shape()) + " * " +
                     ShapeString(b.shape()));
  }
  const auto av = a.data();
  const auto bv = b.data();
  const size_t nb = bv.size();
  std::vector<T> out(av.size());
  for (size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i % nb];
  return MakeOpResult<T>(
      "Mul", a.shape(), std::move(out), {&a, &b},
      [an = a.node_ptr(), bn = b.node_ptr(), nb](Tape<T>& tape,
                                                 Node<T>& self) {
        const auto& g = self.grad;
        if (an->requires_grad) {
          auto& ga = tape.GradOf(an.get());
          for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bn->value[i % nb];
        }
        if (bn->requires_grad) {
          auto& gb = tape.GradOf(bn.get());
          for (size_t i = 0; i < g.size(); ++i) gb[i % nb] += g[i] * an->value[i];
        }
      });
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.data().begin(), a.data().end());
  for (T& v : out) v *= factor;
  return MakeOpResult<T>("Scale", a.shape(), std::move(out), {&a},
                         [an = a.node_ptr(), factor](Tape<T>& tape,
                                                     Node<T>& self) {
                           auto& ga = tape.GradOf(an.get());
                           for (size_t i = 0; i < ga.size(); ++i) {
                             ga[i] += factor * self.grad[i];
                           }
                         });
}

template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("Concat of zero tensors");
  const int rank = parts[0].rank();
  axis = NormalizeAxis(axis, rank);
  Shape shape = parts[0].shape();
  shape[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != rank) throw ShapeError("Concat rank mismatch");
    for (int d = 0; d < rank; ++d) {
      if (d != axis && p.shape()[d] != parts[0].shape()[d]) {
        throw ShapeError("Concat shape mismatch: " + ShapeString(p.shape()) +
                         " vs " + ShapeString(parts[0].shape()));
      }
    }
    shape[axis] += p.shape()[axis];
  }
  const AxisSplit out_split = SplitAt(shape, axis);
  std::vector<T> out(NumElements(shape));
  std::vector<int64_t> offsets;
  std::vector<int64_t> extents;
  int64_t offset = 0;
  for (const auto& p : parts) {
    const int64_t ext = p.shape()[axis];
    const auto src = p.data();
    for (int64_t o = 0; o < out_split.outer; ++o) {
      for (int64_t e = 0; e < ext; ++e) {
        std::copy_n(src.data() + (o * ext + e) * out_split.inner,
                    out_split.inner,
                    out.data() + (o * out_split.extent + offset + e) *
                                     out_split.inner);
      }
    }
    offsets.push_back(offset);
    extents.push_back(ext);
    offset += ext;
  }
  std::vector<const Tensor<T>*> inputs;
  std::vector<NodePtr<T>> nodes;
  for (const auto& p : parts) {
    inputs.push_back(&p);
    nodes.push_back(p.node_ptr());
  }
  return MakeOpResult<T>(
      "Concat", shape, std::move(out), inputs,
      [nodes, offsets, extents, out_split](Tape<T>& tape, Node<T>& self) {
        for (size_t k = 0; k < nodes.size(); ++k) {
          if (!nodes[k]->requires_grad) continue;
          auto& g = tape.GradOf(nodes[k].get());
          const int64_t ext = extents[k];
          for (int64_t o = 0; o < out_split.outer; ++o) {
            for (int64_t e = 0; e < ext; ++e) {
              const T* src = self.grad.data() +
                             (o * out_split.extent + offsets[k] + e) *
                                 out_split.inner;
              T* dst = g.data() + (o * ext + e) * out_split.inner;
              for (int64_t i = 0; i < out_split.inner; ++i) dst[i] += src[i];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> Slice(const Tensor<T>& a, int axis, int start, int end) {
  axis = NormalizeAxis(axis, a.rank());
  const AxisSplit in = SplitAt(a.shape(), axis);
  if (start < 0 || end > in.extent || start > end) {
    throw ShapeError("Slice range [" + std::to_string(start) + "," +
                     std::to_string(end) + ") invalid for " +
                     ShapeString(a.shape()));
  }
  Shape shape = a.shape();
  shape[axis] = end - start;
  const int64_t ext = end - start;
  std::vector<T> out(NumElements(shape));
  const auto src = a.data();
  for (int64_t o = 0; o < in.outer; ++o) {
    std::copy_n(src.data() + (o * in.extent + start) * in.inner,
                ext * in.inner, out.data() + o * ext * in.inner);
  }
  return MakeOpResult<T>(
      "Slice", shape, std::move(out), {&a},
      [an = a.node_ptr(), in, start, ext](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(an.get());
        for (int64_t o = 0; o < in.outer; ++o) {
          const T* src = self.grad.data() + o * ext * in.inner;
          T* dst = g.data() + (o * in.extent + start) * in.inner;
          for (int64_t i = 0; i < ext * in.inner; ++i) dst[i] += src[i];
        }
      });
}

template <typename T>
Tensor<T> Transpose(const Tensor<T>& a) {
  Require2D(a.shape(), "Transpose");
  const int m = a.dim(0), n = a.dim(1);
  std::vector<T> out(static_cast<size_t>(m) * n);
  const auto src = a.data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      out[static_cast<size_t>(j) * m + i] = src[static_cast<size_t>(i) * n + j];
    }
  }
  return MakeOpResult<T>(
      "Transpose", {n, m}, std::move(out), {&a},
      [an = a.node_ptr(), m, n](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(an.get());
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            g[static_cast<size_t>(i) * n + j] +=
                self.grad[static_cast<size_t>(j) * m + i];
          }
        }
      });
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, const Shape& shape) {
  if (NumElements(shape) != a.numel()) {
    throw ShapeError("Reshape " + ShapeString(a.shape()) + " -> " +
                     ShapeString(shape));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  return MakeOpResult<T>("Reshape", shape, std::move(out), {&a},
                         [an = a.node_ptr()](Tape<T>& tape, Node<T>& self) {
                           auto& g = tape.GradOf(an.get());
                           for (size_t i = 0; i < g.size(); ++i) {
                             g[i] += self.grad[i];
                           }
                         });
}

template <typename T>
Tensor<T> EmbeddingLookup(const Tensor<T>& table, std::span<const int> ids) {
  Require2D(table.shape(), "EmbeddingLookup");
  const int vocab = table.dim(0), d = table.dim(1);
  const int n = static_cast<int>(ids.size());
  std::vector<T> out(static_cast<size_t>(n) * d);
  const auto src = table.data();
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw ShapeError("embedding id " + std::to_string(ids[i]) +
                       " outside vocabulary of " + std::to_string(vocab));
    }
    std::copy_n(src.data() + static_cast<size_t>(ids[i]) * d, d,
                out.data() + static_cast<size_t>(i) * d);
  }
  return MakeOpResult<T>(
      "EmbeddingLookup", {n, d}, std::move(out), {&table},
      [tn = table.node_ptr(), idv = std::vector<int>(ids.begin(), ids.end()),
       d](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(tn.get());
        for (size_t i = 0; i < idv.size(); ++i) {
          T* dst = g.data() + static_cast<size_t>(idv[i]) * d;
          const T* src = self.grad.data() + i * d;
          for (int j = 0; j < d; ++j) dst[j] += src[j];
        }
      });
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis) {
  axis = NormalizeAxis(axis, x.rank());
  const AxisSplit s = SplitAt(x.shape(), axis);
  const auto src = x.data();
  std::vector<T> out(src.size());
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t i = 0; i < s.inner; ++i) {
      const int64_t base = o * s.extent * s.inner + i;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t e = 0; e < s.extent; ++e) {
        mx = std::max(mx, src[base + e * s.inner]);
      }
      T total = T(0);
      for (int64_t e = 0; e < s.extent; ++e) {
        const T v = std::exp(src[base + e * s.inner] - mx);
        out[base + e * s.inner] = v;
        total += v;
      }
      for (int64_t e = 0; e < s.extent; ++e) out[base + e * s.inner] /= total;
    }
  }
  return MakeOpResult<T>(
      "Softmax", x.shape(), std::move(out), {&x},
      [xn = x.node_ptr(), s](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        const auto& y = self.value;
        for (int64_t o = 0; o < s.outer; ++o) {
          for (int64_t i = 0; i < s.inner; ++i) {
            const int64_t base = o * s.extent * s.inner + i;
            T dot = T(0);
            for (int64_t e = 0; e < s.extent; ++e) {
              dot += self.grad[base + e * s.inner] * y[base + e * s.inner];
            }
            for (int64_t e = 0; e < s.extent; ++e) {
              const int64_t k = base + e * s.inner;
              g[k] += y[k] * (self.grad[k] - dot);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> MaskedSoftmax(const Tensor<T>& x, std::span<const uint8_t> mask) {
  if (static_cast<int64_t>(mask.size()) != x.numel()) {
    throw ShapeError("MaskedSoftmax mask size differs from input");
  }
  const int n = x.dim(-1);
  const int64_t rows = x.numel() / std::max(n, 1);
  const auto src = x.data();
  std::vector<T> out(src.size(), T(0));
  for (int64_t r = 0; r < rows; ++r) {
    const int64_t base = r * n;
    T mx = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < n; ++j) {
      if (mask[base + j]) mx = std::max(mx, src[base + j]);
    }
    if (mx == -std::numeric_limits<T>::infinity()) continue;
    T total = T(0);
    for (int j = 0; j < n; ++j) {
      if (!mask[base + j]) continue;
      out[base + j] = std::exp(src[base + j] - mx);
      total += out[base + j];
    }
    for (int j = 0; j < n; ++j) out[base + j] /= total;
  }
  return MakeOpResult<T>(
      "MaskedSoftmax", x.shape(), std::move(out), {&x},
      [xn = x.node_ptr(), n, rows](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        const auto& y = self.value;
        for (int64_t r = 0; r < rows; ++r) {
          const int64_t base = r * n;
          T dot = T(0);
          for (int j = 0; j < n; ++j) dot += self.grad[base + j] * y[base + j];
          for (int j = 0; j < n; ++j) {
            g[base + j] += y[base + j] * (self.grad[base + j] - dot);
          }
        }
      });
}

template <typename T>
Tensor<T> LogSoftmax(const Tensor<T>& x) {
  const int n = x.dim(-1);
  const int64_t rows = x.numel() / std::max(n, 1);
  const auto src = x.data();
  std::vector<T> out(src.size());
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = src.data() + r * n;
    T mx = *std::max_element(row, row + n);
    T total = T(0);
    for (int j = 0; j < n; ++j) total += std::exp(row[j] - mx);
    const T lse = mx + std::log(total);
    for (int j = 0; j < n; ++j) out[r * n + j] = row[j] - lse;
  }
  return MakeOpResult<T>(
      "LogSoftmax", x.shape(), std::move(out), {&x},
      [xn = x.node_ptr(), n, rows](Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        for (int64_t r = 0; r < rows; ++r) {
          const int64_t base = r * n;
          T total = T(0);
          for (int j = 0; j < n; ++j) total += self.grad[base + j];
          for (int j = 0; j < n; ++j) {
            g[base + j] +=
                self.grad[base + j] - std::exp(self.value[base + j]) * total;
          }
        }
      });
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gain,
                    const Tensor<T>& bias, T eps) {
  const int n = x.dim(-1);
  if (gain.numel() != n || bias.numel() != n) {
    throw ShapeError("LayerNorm gain/bias size must equal last dimension");
  }
  const int64_t rows = x.numel() / n;
  const auto src = x.data();
  const auto gv = gain.data();
  const auto bv = bias.data();
  std::vector<T> normed(src.size());
  std::vector<T> inv_std(rows);
  std::vector<T> out(src.size());
  for (int64_t r = 0; r < rows; ++r) {
    const T* row = src.data() + r * n;
    T mean = T(0);
    for (int j = 0; j < n; ++j) mean += row[j];
    mean /= n;
    T var = T(0);
    for (int j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= n;
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) {
      const T y = (row[j] - mean) * inv_std[r];
      normed[r * n + j] = y;
      out[r * n + j] = y * gv[j] + bv[j];
    }
  }
  return MakeOpResult<T>(
      "LayerNorm", x.shape(), std::move(out), {&x, &gain, &bias},
      [xn = x.node_ptr(), gn = gain.node_ptr(), bn = bias.node_ptr(),
       normed = std::move(normed), inv_std = std::move(inv_std), n,
       rows](Tape<T>& tape, Node<T>& self) {
        const auto& G = self.grad;
        if (gn->requires_grad) {
          auto& gg = tape.GradOf(gn.get());
          for (int64_t r = 0; r < rows; ++r) {
            for (int j = 0; j < n; ++j) gg[j] += G[r * n + j] * normed[r * n + j];
          }
        }
        if (bn->requires_grad) {
          auto& gb = tape.GradOf(bn.get());
          for (int64_t r = 0; r < rows; ++r) {
            for (int j = 0; j < n; ++j) gb[j] += G[r * n + j];
          }
        }
        if (xn->requires_grad) {
          auto& gx = tape.GradOf(xn.get());
          for (int64_t r = 0; r < rows; ++r) {
            T mean_dy = T(0), mean_dy_y = T(0);
            for (int j = 0; j < n; ++j) {
              const T dy = G[r * n + j] * gn->value[j];
              mean_dy += dy;
              mean_dy_y += dy * normed[r * n + j];
            }
            mean_dy /= n;
            mean_dy_y /= n;
            for (int j = 0; j < n; ++j) {
              const T dy = G[r * n + j] * gn->value[j];
              gx[r * n + j] +=
                  inv_std[r] * (dy - mean_dy - normed[r * n + j] * mean_dy_y);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& x) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (T& v : out) v = v > T(0) ? v : T(0);
  return MakeOpResult<T>("Relu", x.shape(), std::move(out), {&x},
                         [xn = x.node_ptr()](Tape<T>& tape, Node<T>& self) {
                           auto& g = tape.GradOf(xn.get());
                           for (size_t i = 0; i < g.size(); ++i) {
                             if (xn->value[i] > T(0)) g[i] += self.grad[i];
                           }
                         });
}

template <typename T>
Tensor<T> MaskedFill(const Tensor<T>& x, std::span<const uint8_t> mask,
                     T value) {
  if (static_cast<int64_t>(mask.size()) != x.numel()) {
    throw ShapeError("MaskedFill mask size differs from input");
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  for (size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out[i] = value;
  }
  return MakeOpResult<T>(
      "MaskedFill", x.shape(), std::move(out), {&x},
      [xn = x.node_ptr(), m = std::vector<uint8_t>(mask.begin(), mask.end())](
          Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        for (size_t i = 0; i < g.size(); ++i) {
          if (!m[i]) g[i] += self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, T p, uint64_t seed) {
  if (p < T(0) || p >= T(1)) throw std::invalid_argument("dropout p in [0,1)");
  if (p == T(0)) return x;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  const T scale = T(1) / (T(1) - p);
  std::vector<T> factor(x.numel());
  for (T& f : factor) f = keep(rng) ? scale : T(0);
  std::vector<T> out(x.data().begin(), x.data().end());
  for (size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  return MakeOpResult<T>(
      "Dropout", x.shape(), std::move(out), {&x},
      [xn = x.node_ptr(), factor = std::move(factor)](Tape<T>& tape,
                                                      Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        for (size_t i = 0; i < g.size(); ++i) g[i] += factor[i] * self.grad[i];
      });
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.data()) total += v;
  return MakeOpResult<T>("Sum", Shape{}, std::vector<T>{total}, {&x},
                         [xn = x.node_ptr()](Tape<T>& tape, Node<T>& self) {
                           auto& g = tape.GradOf(xn.get());
                           for (T& v : g) v += self.grad[0];
                         });
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& x) {
  if (x.numel() == 0) throw ShapeError("Mean of empty tensor");
  const T n = static_cast<T>(x.numel());
  T total = T(0);
  for (T v : x.data()) total += v;
  return MakeOpResult<T>("Mean", Shape{}, std::vector<T>{total / n}, {&x},
                         [xn = x.node_ptr(), n](Tape<T>& tape, Node<T>& self) {
                           auto& g = tape.GradOf(xn.get());
                           for (T& v : g) v += self.grad[0] / n;
                         });
}

template <typename T>
Tensor<T> UnfoldTime(const Tensor<T>& x, int kernel, int stride, int pad) {
  Require2D(x.shape(), "UnfoldTime");
  const int t_in = x.dim(0), c = x.dim(1);
  const int span = t_in + 2 * pad - kernel;
  if (span < 0) {
    throw ShapeError("UnfoldTime input of " + std::to_string(t_in) +
                     " frames is shorter than the kernel");
  }
  const int t_out = span / stride + 1;
  const int width = kernel * c;
  std::vector<T> out(static_cast<size_t>(t_out) * width, T(0));
  const auto src = x.data();
  for (int i = 0; i < t_out; ++i) {
    for (int k = 0; k < kernel; ++k) {
      const int t = i * stride - pad + k;
      if (t < 0 || t >= t_in) continue;
      std::copy_n(src.data() + static_cast<size_t>(t) * c, c,
                  out.data() + static_cast<size_t>(i) * width + k * c);
    }
  }
  return MakeOpResult<T>(
      "UnfoldTime", {t_out, width}, std::move(out), {&x},
      [xn = x.node_ptr(), t_in, t_out, c, kernel, stride, pad, width](
          Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        for (int i = 0; i < t_out; ++i) {
          for (int k = 0; k < kernel; ++k) {
            const int t = i * stride - pad + k;
            if (t < 0 || t >= t_in) continue;
            const T* src = self.grad.data() + static_cast<size_t>(i) * width +
                           k * c;
            T* dst = g.data() + static_cast<size_t>(t) * c;
            for (int j = 0; j < c; ++j) dst[j] += src[j];
          }
        }
      });
}

template <typename T>
Tensor<T> WeightedSum(const Tensor<T>& x, std::span<const T> weight) {
  if (static_cast<int64_t>(weight.size()) != x.numel()) {
    throw ShapeError("WeightedSum weight size differs from input");
  }
  T total = T(0);
  const auto src = x.data();
  for (size_t i = 0; i < weight.size(); ++i) total += src[i] * weight[i];
  return MakeOpResult<T>(
      "WeightedSum", Shape{}, std::vector<T>{total}, {&x},
      [xn = x.node_ptr(), w = std::vector<T>(weight.begin(), weight.end())](
          Tape<T>& tape, Node<T>& self) {
        auto& g = tape.GradOf(xn.get());
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * w[i];
      });
}

#define DUALASR_INSTANTIATE(T)                                                \
  template Tensor<T> MatMul(const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Scale(const Tensor<T>&, T);                              \
  template Tensor<T> Concat(const std::vector<Tensor<T>>&, int);              \
  template Tensor<T> Slice(const Tensor<T>&, int, int, int);                  \
  template Tensor<T> Transpose(const Tensor<T>&);                             \
  template Tensor<T> Reshape(const Tensor<T>&, const Shape&);                 \
  template Tensor<T> EmbeddingLookup(const Tensor<T>&, std::span<const int>); \
  template Tensor<T> Softmax(const Tensor<T>&, int);                          \
  template Tensor<T> MaskedSoftmax(const Tensor<T>&,                          \
                                   std::span<const uint8_t>);                 \
  template Tensor<T> LogSoftmax(const Tensor<T>&);                            \
  template Tensor<T> LayerNorm(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, T);                          \
  template Tensor<T> Relu(const Tensor<T>&);                                  \
  template Tensor<T> MaskedFill(const Tensor<T>&, std::span<const uint8_t>,   \
                                T);                                           \
  template Tensor<T> Dropout(const Tensor<T>&, T, uint64_t);                  \
  template Tensor<T> Sum(const Tensor<T>&);                                   \
  template Tensor<T> Mean(const Tensor<T>&);                                  \
  template Tensor<T> UnfoldTime(const Tensor<T>&, int, int, int);             \
  template Tensor<T> WeightedSum(const Tensor<T>&, std::span<const T>);

DUALASR_INSTANTIATE(float)
DUALASR_INSTANTIATE(double)

#undef DUALASR_INSTANTIATE

}  // namespace dualasr
