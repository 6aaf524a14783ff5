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

#include "lvae/tensor/tape.h"

#include <memory>
#include <string>
#include <unordered_set>

#include "lvae/tensor/ops.h"

namespace lvae {
namespace {

thread_local bool recording_enabled = true;

}  // namespace

Var Var::Constant(Tensor value) {
  Var v;
  v.value_ = std::make_shared<const Tensor>(std::move(value));
  return v;
}

bool RecordingEnabled() { return recording_enabled; }

NoGradGuard::NoGradGuard() : previous_(recording_enabled) {
  recording_enabled = false;
}
NoGradGuard::~NoGradGuard() { recording_enabled = previous_; }

namespace internal {

RecordingScope::RecordingScope(bool enabled) : previous_(recording_enabled) {
  recording_enabled = enabled;
}
RecordingScope::~RecordingScope() { recording_enabled = previous_; }

Var MakeResult(std::string_view op, Tensor value, std::vector<Var> inputs,
               BackwardFn backward, bool second_order) {
  if (CheckedMode() && !value.AllFinite()) {
    throw TensorError("non-finite value produced by " + std::string(op));
  }
  Tape* tape = nullptr;
  if (recording_enabled) {
    for (const Var& in : inputs) {
      if (!in.defined() || in.tape() == nullptr) continue;
      if (tape != nullptr && tape != in.tape()) {
        throw TensorError(std::string(op) + ": inputs live on different tapes");
      }
      tape = in.tape();
    }
  }
  if (tape == nullptr) return Var::Constant(std::move(value));
  return tape->Record(op, std::move(value), std::move(inputs),
                      std::move(backward), second_order);
}

}  // namespace internal

Var Tape::Leaf(Tensor value) {
  return Record("leaf", std::move(value), {}, nullptr, true);
}

Var Tape::Record(std::string_view op, Tensor value, std::vector<Var> inputs,
                 BackwardFn backward, bool second_order) {
  Node node;
  node.op = op;
  node.value = std::make_shared<const Tensor>(std::move(value));
  node.inputs = std::move(inputs);
  node.backward = std::move(backward);
  node.second_order = second_order;
  Var v;
  v.value_ = node.value;
  v.tape_ = this;
  v.id_ = static_cast<int64_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return v;
}

std::vector<Var> Tape::Grad(const Var& loss, std::span<const Var> wrt,
                            bool create_graph) {
  if (!loss.defined() || loss.size() != 1) {
    throw TensorError("Grad needs a scalar loss");
  }
  std::vector<Var> result;
  result.reserve(wrt.size());
  auto zeros_like = [](const Var& v) {
    return Var::Constant(Tensor::Zeros(v.shape()));
  };
  if (loss.tape() == nullptr) {
    for (const Var& w : wrt) result.push_back(zeros_like(w));
    return result;
  }
  if (loss.tape() != this) throw TensorError("loss recorded on another tape");

  const int64_t n = loss.id() + 1;
  std::vector<Var> slots(n);
  std::unordered_set<int64_t> keep;
  // depends[id]: some requested input is an ancestor of (or is) node id.
  std::vector<char> depends(n, 0);
  for (const Var& w : wrt) {
    if (w.tape() == this && w.id() < n) {
      keep.insert(w.id());
      depends[w.id()] = 1;
    }
  }
  for (int64_t id = 0; id < n; ++id) {
    if (depends[id]) continue;
    for (const Var& in : nodes_[id].inputs) {
      if (in.tape() == this && in.id() < n && depends[in.id()]) {
        depends[id] = 1;
        break;
      }
    }
  }

  internal::RecordingScope scope(create_graph);
  slots[loss.id()] = Var::Constant(Tensor::Ones(loss.shape()));
  for (int64_t id = loss.id(); id >= 0; --id) {
    if (!slots[id].defined() || !depends[id]) continue;
    // Copy what we need: with create_graph the deque grows underneath us.
    const BackwardFn backward = nodes_[id].backward;
    if (!backward) continue;
    if (create_graph && !nodes_[id].second_order) {
      throw TensorError("op '" + std::string(nodes_[id].op) +
                        "' does not support differentiating its gradient");
    }
    const std::vector<Var> inputs = nodes_[id].inputs;
    std::unique_ptr<bool[]> needed(new bool[inputs.size()]);
    for (size_t i = 0; i < inputs.size(); ++i) {
      needed[i] = inputs[i].tape() == this && inputs[i].id() < n &&
                  depends[inputs[i].id()];
    }
    std::vector<Var> grads =
        backward(slots[id], std::span<const bool>(needed.get(), inputs.size()));
    for (size_t i = 0; i < inputs.size(); ++i) {
      const Var& in = inputs[i];
      if (i >= grads.size() || !grads[i].defined()) continue;
      if (!needed[i]) continue;
      Var& slot = slots[in.id()];
      slot = slot.defined() ? Add(slot, grads[i]) : grads[i];
    }
    if (!keep.contains(id)) slots[id] = Var();
  }

  for (const Var& w : wrt) {
    if (w.tape() == this && w.id() < n && slots[w.id()].defined()) {
      result.push_back(slots[w.id()]);
    } else {
      result.push_back(zeros_like(w));
    }
  }
  return result;
}

}  // namespace lvae
