// Copyright 2026 The LVAE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LVAE_TENSOR_TAPE_H_
#define LVAE_TENSOR_TAPE_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lvae/tensor/tensor.h"

namespace lvae {

class Tape;

// A value flowing through a computation: either a node recorded on a Tape or
// a detached constant. Cheap to copy; the underlying tensor is shared and
// never mutated after creation.
class Var {
 public:
  Var() = default;

  static Var Constant(Tensor value);

  bool defined() const { return value_ != nullptr; }
  const Tensor& value() const { return *value_; }
  const Shape& shape() const { return value_->shape(); }
  int64_t size() const { return value_->size(); }

  Tape* tape() const { return tape_; }
  int64_t id() const { return id_; }
  bool requires_grad() const { return tape_ != nullptr; }

  // Same value, no tape attachment.
  Var Detached() const { return Constant(*value_); }

 private:
  friend class Tape;
  std::shared_ptr<const Tensor> value_;
  Tape* tape_ = nullptr;
  int64_t id_ = -1;
};

// Given the gradient flowing into a node's output, returns one gradient per
// input. `needed[i]` says whether input i leads to a requested gradient;
// entries for other inputs may be left undefined. Implementations build their
// results out of differentiable ops so that, when recording is on, the
// gradient itself lands on the tape and can be differentiated again.
using BackwardFn = std::function<std::vector<Var>(const Var& grad_output,
                                                  std::span<const bool> needed)>;

// Ordered record of primitive operations. Nodes are appended in execution
// order, so parents always precede children and a reverse sweep over ids is a
// valid reverse topological order. Single writer.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a differentiable input.
  Var Leaf(Tensor value);

  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }
  std::string_view op_name(int64_t id) const { return nodes_[id].op; }

  // Gradients of the scalar `loss` with respect to each of `wrt`. Inputs not
  // on any path to the loss get zeros. With `create_graph`, the backward pass
  // is itself recorded (only ops marked second-order capable may appear on
  // the path) and the results can be differentiated again.
  std::vector<Var> Grad(const Var& loss, std::span<const Var> wrt,
                        bool create_graph = false);

  // Internal: used by op implementations.
  Var Record(std::string_view op, Tensor value, std::vector<Var> inputs,
             BackwardFn backward, bool second_order);

 private:
  struct Node {
    std::string_view op;
    std::shared_ptr<const Tensor> value;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool second_order = true;
  };
  std::deque<Node> nodes_;
};

// While alive, ops do not record onto any tape and return constants.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool RecordingEnabled();

namespace internal {

// Wraps `value` as the result of an op: recorded on the inputs' tape when
// recording is enabled and some input requires a gradient, otherwise a
// constant. All taped inputs must share one tape.
Var MakeResult(std::string_view op, Tensor value, std::vector<Var> inputs,
               BackwardFn backward, bool second_order = true);

// Sets the recording flag for a scope.
class RecordingScope {
 public:
  explicit RecordingScope(bool enabled);
  ~RecordingScope();
  RecordingScope(const RecordingScope&) = delete;
  RecordingScope& operator=(const RecordingScope&) = delete;

 private:
  bool previous_;
};

}  // namespace internal
}  // namespace lvae

#endif  // LVAE_TENSOR_TAPE_H_
