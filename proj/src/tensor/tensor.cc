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

#include "dualasr/tensor/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualasr {

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in " + ShapeString(shape));
    n *= d;
  }
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

template <typename T>
thread_local Tape<T>* active_tape = nullptr;

template <typename T>
std::shared_ptr<Node<T>> NewNode(const Shape& shape, std::vector<T> values) {
  if (NumElements(shape) != static_cast<int64_t>(values.size())) {
    throw ShapeError("shape " + ShapeString(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(values);
  return node;
}

}  // namespace

template <typename T>
Tensor<T> Tensor<T>::Zeros(const Shape& shape) {
  return Tensor(NewNode<T>(shape, std::vector<T>(NumElements(shape), T(0))));
}

template <typename T>
Tensor<T> Tensor<T>::Full(const Shape& shape, T value) {
  return Tensor(NewNode<T>(shape, std::vector<T>(NumElements(shape), value)));
}

template <typename T>
Tensor<T> Tensor<T>::FromData(const Shape& shape, std::vector<T> values) {
  return Tensor(NewNode<T>(shape, std::move(values)));
}

template <typename T>
Tensor<T> Tensor<T>::Scalar(T value) {
  return Tensor(NewNode<T>(Shape{}, std::vector<T>{value}));
}

template <typename T>
Tensor<T> Tensor<T>::Parameter(const Shape& shape, std::vector<T> values) {
  auto node = NewNode<T>(shape, std::move(values));
  node->requires_grad = true;
  return Tensor(std::move(node));
}

template <typename T>
int Tensor<T>::dim(int axis) const {
  const int r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw ShapeError("axis out of range for " + ShapeString(shape()));
  }
  return node_->shape[axis];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on non-scalar " + ShapeString(shape()));
  }
  return node_->value[0];
}

template <typename T>
T Tensor<T>::at(int row, int col) const {
  if (rank() != 2) throw ShapeError("at() needs a 2-D tensor");
  return node_->value[static_cast<size_t>(row) * node_->shape[1] + col];
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), T(0));
  return node_->grad;
}

template <typename T>
void Tensor<T>::ZeroGrad() {
  std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
void Tensor<T>::ClearGrad() {
  node_->grad.clear();
}

template <typename T>
Tape<T>::~Tape() {
  Reset();
}

template <typename T>
Tape<T>* Tape<T>::Active() {
  return active_tape<T>;
}

template <typename T>
Tape<T>* Tape<T>::ExchangeActive(Tape* tape) {
  Tape* previous = active_tape<T>;
  active_tape<T> = tape;
  return previous;
}

template <typename T>
void Tape<T>::Record(std::shared_ptr<Node<T>> node) {
  if (backward_done_) {
    throw TapeError("recording on a tape that already ran backward");
  }
  node->tape = this;
  nodes_.push_back(std::move(node));
}

template <typename T>
std::vector<T>& Tape<T>::GradOf(Node<T>* node) {
  if (node->tape == this) {
    if (node->grad.empty()) node->grad.assign(node->value.size(), T(0));
    return node->grad;
  }
  auto it = staged_.find(node);
  if (it == staged_.end()) {
    staged_order_.push_back(node);
    it = staged_.emplace(node, std::vector<T>(node->value.size(), T(0))).first;
  }
  return it->second;
}

template <typename T>
void Tape<T>::Backward(const Tensor<T>& root, bool flush) {
  if (!root.defined() || root.node()->tape != this) {
    throw TapeError("backward root is not recorded on this tape");
  }
  if (root.numel() != 1) {
    throw TapeError("backward root must be a scalar, got " +
                    ShapeString(root.shape()));
  }
  if (backward_done_) {
    throw TapeError("backward already ran on this tape; Reset() first");
  }
  backward_done_ = true;
  GradOf(root.node())[0] = T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node<T>& node = **it;
    if (node.grad.empty() || !node.backward) continue;
    node.backward(*this, node);
  }
  if (flush) FlushLeafGrads();
}

template <typename T>
void Tape<T>::FlushLeafGrads() {
  for (Node<T>* leaf : staged_order_) {
    const std::vector<T>& g = staged_[leaf];
    if (leaf->grad.empty()) leaf->grad.assign(g.size(), T(0));
    for (size_t i = 0; i < g.size(); ++i) leaf->grad[i] += g[i];
  }
  staged_.clear();
  staged_order_.clear();
}

template <typename T>
void Tape<T>::Reset() {
  // Surviving handles become constants; they no longer reference this tape.
  for (auto& node : nodes_) {
    node->tape = nullptr;
    node->requires_grad = false;
    node->backward = nullptr;
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
  nodes_.clear();
  staged_.clear();
  staged_order_.clear();
  backward_done_ = false;
}

template <typename T>
TapeScope<T>::TapeScope(Tape<T>& tape)
    : previous_(Tape<T>::ExchangeActive(&tape)) {}

template <typename T>
TapeScope<T>::~TapeScope() {
  Tape<T>::ExchangeActive(previous_);
}

template <typename T>
NoGradScope<T>::NoGradScope() : previous_(Tape<T>::ExchangeActive(nullptr)) {}

template <typename T>
NoGradScope<T>::~NoGradScope() {
  Tape<T>::ExchangeActive(previous_);
}

namespace {

template <typename T>
Tensor<T> MakeOpResultImpl(const char* op_name, Shape shape,
                           std::vector<T> values, bool any_requires_grad,
                           std::function<void(Tape<T>&, Node<T>&)> backward) {
  for (const T& v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") +
                         op_name);
    }
  }
  auto node = NewNode<T>(shape, std::move(values));
  Tape<T>* tape = Tape<T>::Active();
  if (tape != nullptr && any_requires_grad) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    tape->Record(node);
  }
  return Tensor<T>(std::move(node));
}

}  // namespace

template <typename T>
Tensor<T> MakeOpResult(const char* op_name, Shape shape, std::vector<T> values,
                       std::initializer_list<const Tensor<T>*> inputs,
                       std::function<void(Tape<T>&, Node<T>&)> backward) {
  bool any = false;
  for (const Tensor<T>* t : inputs) any = any || t->requires_grad();
  return MakeOpResultImpl<T>(op_name, std::move(shape), std::move(values), any,
                             std::move(backward));
}

template <typename T>
Tensor<T> MakeOpResult(const char* op_name, Shape shape, std::vector<T> values,
                       const std::vector<const Tensor<T>*>& inputs,
                       std::function<void(Tape<T>&, Node<T>&)> backward) {
  bool any = false;
  for (const Tensor<T>* t : inputs) any = any || t->requires_grad();
  return MakeOpResultImpl<T>(op_name, std::move(shape), std::move(values), any,
                             std::move(backward));
}

#define DUALASR_INSTANTIATE(T)                                               \
  template class Tensor<T>;                                                  \
  template class Tape<T>;                                                    \
  template class TapeScope<T>;                                               \
  template class NoGradScope<T>;                                             \
  template Tensor<T> MakeOpResult<T>(                                        \
      const char*, Shape, std::vector<T>,                                    \
      std::initializer_list<const Tensor<T>*>,                               \
      std::function<void(Tape<T>&, Node<T>&)>);                              \
  template Tensor<T> MakeOpResult<T>(const char*, Shape, std::vector<T>,     \
                                     const std::vector<const Tensor<T>*>&,   \
                                     std::function<void(Tape<T>&, Node<T>&)>);

DUALASR_INSTANTIATE(float)
DUALASR_INSTANTIATE(double)

#undef DUALASR_INSTANTIATE

}  // namespace dualasr
