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

// DP-SGD building blocks: Poisson subsampling, per-example clipping and the
// Gaussian-noised gradient sum.

#ifndef LVAE_TRAINING_DP_SGD_H_
#define LVAE_TRAINING_DP_SGD_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tensor.h"

namespace lvae::training {

struct DpSgdConfig {
  double clip_norm = 1.0;
  double noise_multiplier = 1.1;
  // Poisson inclusion probability per example and step.
  double sampling_rate = 0.01;
  // Target delta for budget reporting.
  double delta = 1e-5;
  // Step size of the noisy SGD update.
  double learning_rate = 0.05;

  // clip_norm > 0, noise_multiplier >= 0, sampling_rate in (0, 1],
  // sampling_rate * dataset_size >= 1, delta in (0, 1), learning_rate > 0.
  absl::Status Validate(int64_t dataset_size) const;
};

// One gradient tensor per model parameter.
using GradientList = std::vector<Tensor>;

// l2 norm of the concatenation of all tensors.
double GlobalNorm(const GradientList& grads);

// Scales each example's gradient list by min(1, clip_norm / ||g||) in place
// and returns the factors. Throws TensorError unless clip_norm > 0.
std::vector<double> ClipPerExample(std::span<GradientList> per_example, double clip_norm);

// Indices i < n included independently with probability p, in increasing
// order.
std::vector<int64_t> PoissonSample(int64_t n, double p, RngStream& rng);

// (1 / (p N)) (sum_i clip(g_i) + N(0, sigma^2 C^2 I)) with N = dataset_size.
// Clips `per_example` in place. `shapes` fixes the layout, so an empty batch
// still yields pure noise. Noise is drawn parameter by parameter in storage
// order.
absl::StatusOr<GradientList> DpSgdStep(std::span<GradientList> per_example,
                                       std::span<const Shape> shapes, const DpSgdConfig& config,
                                       int64_t dataset_size, RngStream& rng);

}  // namespace lvae::training

#endif  // LVAE_TRAINING_DP_SGD_H_
