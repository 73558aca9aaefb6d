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

#ifndef DUALASR_TENSOR_OPS_H_
#define DUALASR_TENSOR_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dualasr/tensor/tensor.h"

namespace dualasr {

// All ops copy their outputs; no output aliases an input buffer.

// [m x k] * [k x n] -> [m x n]
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise sum. `b` may also be a vector broadcast over the rows of `a`
// when its size equals the last dimension of `a`.
template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise product; same broadcast rule as Add.
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> Scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, int axis);

// Half-open range [start, end) along `axis`.
template <typename T>
Tensor<T> Slice(const Tensor<T>& a, int axis, int start, int end);

// 2-D transpose.
template <typename T>
Tensor<T> Transpose(const Tensor<T>& a);

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, const Shape& shape);

// Rows of `table` [V x d] selected by `ids` -> [n x d].
template <typename T>
Tensor<T> EmbeddingLookup(const Tensor<T>& table, std::span<const int> ids);

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis);

// Softmax over the last axis; entries with mask == 0 get probability 0 and a
// fully masked row yields all zeros.
template <typename T>
Tensor<T> MaskedSoftmax(const Tensor<T>& x, std::span<const uint8_t> mask);

// Log-softmax over the last axis.
template <typename T>
Tensor<T> LogSoftmax(const Tensor<T>& x);

// Normalises over the last axis, then applies gain and bias.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gain,
                    const Tensor<T>& bias, T eps);

template <typename T>
Tensor<T> Relu(const Tensor<T>& x);

// Entries with mask != 0 are replaced by `value` (gradient blocked there).
template <typename T>
Tensor<T> MaskedFill(const Tensor<T>& x, std::span<const uint8_t> mask,
                     T value);

// Inverted dropout with an explicit seed; identity when p == 0.
template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, T p, uint64_t seed);

template <typename T>
Tensor<T> Sum(const Tensor<T>& x);

template <typename T>
Tensor<T> Mean(const Tensor<T>& x);

// Sliding windows over the rows of a 2-D [time x channels] input, zero padded
// by `pad` rows on each side: output row i holds input rows
// i*stride - pad ... i*stride - pad + kernel - 1, concatenated.
template <typename T>
Tensor<T> UnfoldTime(const Tensor<T>& x, int kernel, int stride, int pad);

// Sum of x[i] * weight[i] with a constant weight tensor of the same shape.
template <typename T>
Tensor<T> WeightedSum(const Tensor<T>& x, std::span<const T> weight);

}  // namespace dualasr

#endif  // DUALASR_TENSOR_OPS_H_
