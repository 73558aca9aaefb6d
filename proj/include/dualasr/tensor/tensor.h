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

#ifndef DUALASR_TENSOR_TENSOR_H_
#define DUALASR_TENSOR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dualasr {

using Shape = std::vector<int>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a forward op produces NaN or Inf from finite inputs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

int64_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

template <typename T>
class Tape;

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  // Leaves: persistent accumulated gradient. Recorded nodes: scratch buffer
  // owned by the tape for the duration of one backward pass.
  std::vector<T> grad;
  bool requires_grad = false;
  Tape<T>* tape = nullptr;
  std::function<void(Tape<T>&, Node&)> backward;
};

// Lightweight handle over a shared node. Copies alias the same storage.
template <typename T>
class Tensor {
 public:
  using NodePtr = std::shared_ptr<Node<T>>;

  Tensor() = default;
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

  static Tensor Zeros(const Shape& shape);
  static Tensor Full(const Shape& shape, T value);
  static Tensor FromData(const Shape& shape, std::vector<T> values);
  static Tensor Scalar(T value);
  // A trainable leaf. Gradients accumulate into it across backward passes
  // until ZeroGrad().
  static Tensor Parameter(const Shape& shape, std::vector<T> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const;
  int64_t numel() const { return static_cast<int64_t>(node_->value.size()); }

  std::span<const T> data() const { return node_->value; }
  // Direct write access for initialisation and optimizer updates only.
  std::span<T> mutable_data() { return node_->value; }
  T item() const;
  T at(int row, int col) const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad();
  void ZeroGrad();
  // Releases the gradient buffer; has_grad() becomes false.
  void ClearGrad();

  Node<T>* node() const { return node_.get(); }
  const NodePtr& node_ptr() const { return node_; }

 private:
  NodePtr node_;
};

// Ordered record of differentiable ops executed while it is the active tape
// on the current thread. Parameters (leaves) are never owned by a tape; their
// gradients are staged per tape and flushed in a deterministic order.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  ~Tape();

  // Runs reverse-mode differentiation from a scalar root recorded on this
  // tape. With flush=false, leaf gradients stay staged until FlushLeafGrads.
  void Backward(const Tensor<T>& root, bool flush = true);
  void FlushLeafGrads();
  void Reset();

  size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  // Gradient buffer of `node` for the current backward pass (zero-initialised
  // on first access). Used by op backward functions.
  std::vector<T>& GradOf(Node<T>* node);

  void Record(std::shared_ptr<Node<T>> node);

  static Tape* Active();
  // Installs `tape` as this thread's active tape and returns the previous one.
  static Tape* ExchangeActive(Tape* tape);

 private:
  std::vector<std::shared_ptr<Node<T>>> nodes_;
  std::vector<Node<T>*> staged_order_;
  std::unordered_map<Node<T>*, std::vector<T>> staged_;
  bool backward_done_ = false;
};

// Makes `tape` the active recording tape on this thread for the scope's
// lifetime. Without an active tape ops compute values only.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Temporarily disables recording on this thread.
template <typename T>
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Builds the output of a custom op. When any input requires grad and a tape is
// active, the node is recorded with `backward`; otherwise it is a constant.
// Throws NumericError if `values` contains a non-finite number.
template <typename T>
Tensor<T> MakeOpResult(const char* op_name, Shape shape, std::vector<T> values,
                       std::initializer_list<const Tensor<T>*> inputs,
                       std::function<void(Tape<T>&, Node<T>&)> backward);

template <typename T>
Tensor<T> MakeOpResult(const char* op_name, Shape shape, std::vector<T> values,
                       const std::vector<const Tensor<T>*>& inputs,
                       std::function<void(Tape<T>&, Node<T>&)> backward);

}  // namespace dualasr

#endif  // DUALASR_TENSOR_TENSOR_H_
