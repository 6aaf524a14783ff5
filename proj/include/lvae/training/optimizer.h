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

// First-order optimizers over flat lists of parameter tensors.

#ifndef LVAE_TRAINING_OPTIMIZER_H_
#define LVAE_TRAINING_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "lvae/tensor/tensor.h"

namespace lvae::training {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators mirror the parameter shapes; `step` counts completed
// updates.
struct AdamState {
  AdamConfig config;
  int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState InitAdam(std::span<const Tensor* const> params, const AdamConfig& config);

// One bias-corrected Adam update:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   p <- p - lr (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
// Throws TensorError when the shapes disagree with the state.
void AdamStep(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state);

// p <- p - lr g.
void SgdStep(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr);

}  // namespace lvae::training

#endif  // LVAE_TRAINING_OPTIMIZER_H_
