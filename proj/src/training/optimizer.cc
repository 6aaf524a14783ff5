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

#include "lvae/training/optimizer.h"

#include <cmath>
#include <string>

namespace lvae::training {
namespace {

void CheckShapes(std::span<Tensor* const> params, std::span<const Tensor> grads, size_t expected) {
  if (params.size() != expected || grads.size() != expected) {
    throw TensorError("optimizer: expected " + std::to_string(expected) + " parameters, got " +
                      std::to_string(params.size()) + " parameters and " +
                      std::to_string(grads.size()) + " gradients");
  }
  for (size_t i = 0; i < expected; ++i) {
    if (params[i]->shape() != grads[i].shape()) {
      throw TensorError("optimizer: gradient " + std::to_string(i) +
                        " does not match its parameter's shape");
    }
  }
}

}  // namespace

AdamState InitAdam(std::span<const Tensor* const> params, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  for (const Tensor* p : params) {
    state.m.push_back(Tensor(p->shape()));
    state.v.push_back(Tensor(p->shape()));
  }
  return state;
}

void AdamStep(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state) {
  CheckShapes(params, grads, state.m.size());
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i].data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    for (int64_t j = 0; j < params[i]->size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      p[j] -= c.lr * (m[j] / correct1) / (std::sqrt(v[j] / correct2) + c.eps);
    }
  }
}

void SgdStep(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr) {
  CheckShapes(params, grads, params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i].data();
    for (int64_t j = 0; j < params[i]->size(); ++j) p[j] -= lr * g[j];
  }
}

}  // namespace lvae::training
