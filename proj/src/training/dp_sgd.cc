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

#include "lvae/training/dp_sgd.h"

#include <cmath>
#include <string>

#include "absl/strings/str_cat.h"

namespace lvae::training {

absl::Status DpSgdConfig::Validate(int64_t dataset_size) const {
  if (!(clip_norm > 0)) return absl::InvalidArgumentError("dp.clip_norm must be > 0");
  if (!(noise_multiplier >= 0)) {
    return absl::InvalidArgumentError("dp.noise_multiplier must be >= 0");
  }
  if (!(sampling_rate > 0 && sampling_rate <= 1)) {
    return absl::InvalidArgumentError("dp.sampling_rate must lie in (0, 1]");
  }
  if (sampling_rate * static_cast<double>(dataset_size) < 1) {
    return absl::InvalidArgumentError(absl::StrCat("dp.sampling_rate * dataset size = ",
                                                   sampling_rate * dataset_size, " < 1"));
  }
  if (!(delta > 0 && delta < 1)) return absl::InvalidArgumentError("dp.delta must lie in (0, 1)");
  if (!(learning_rate > 0)) return absl::InvalidArgumentError("dp.learning_rate must be > 0");
  return absl::OkStatus();
}

double GlobalNorm(const GradientList& grads) {
  double sum = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.values()) sum += v * v;
  }
  return std::sqrt(sum);
}

std::vector<double> ClipPerExample(std::span<GradientList> per_example, double clip_norm) {
  if (!(clip_norm > 0)) throw TensorError("ClipPerExample: clip_norm must be > 0");
  std::vector<double> factors;
  factors.reserve(per_example.size());
  for (GradientList& grads : per_example) {
    const double norm = GlobalNorm(grads);
    const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
    if (factor < 1.0) {
      for (Tensor& g : grads) {
        for (double& v : g.values()) v *= factor;
      }
    }
    factors.push_back(factor);
  }
  return factors;
}

std::vector<int64_t> PoissonSample(int64_t n, double p, RngStream& rng) {
  std::vector<int64_t> out;
  for (int64_t i = 0; i < n; ++i) {
    if (rng.NextUniform() < p) out.push_back(i);
  }
  return out;
}

absl::StatusOr<GradientList> DpSgdStep(std::span<GradientList> per_example,
                                       std::span<const Shape> shapes, const DpSgdConfig& config,
                                       int64_t dataset_size, RngStream& rng) {
  if (absl::Status s = config.Validate(dataset_size); !s.ok()) return s;
  for (const GradientList& grads : per_example) {
    if (grads.size() != shapes.size()) {
      return absl::InvalidArgumentError("per-example gradient list has the wrong length");
    }
    for (size_t k = 0; k < shapes.size(); ++k) {
      if (grads[k].shape() != shapes[k]) {
        return absl::InvalidArgumentError(
            absl::StrCat("per-example gradient ", k, " has the wrong shape"));
      }
    }
  }
  ClipPerExample(per_example, config.clip_norm);
  const double noise_std = config.noise_multiplier * config.clip_norm;
  const double scale = 1.0 / (config.sampling_rate * static_cast<double>(dataset_size));
  GradientList out;
  out.reserve(shapes.size());
  for (size_t k = 0; k < shapes.size(); ++k) {
    Tensor sum(shapes[k]);
    // Fixed example order keeps the reduction reproducible.
    for (const GradientList& grads : per_example) {
      const double* g = grads[k].data();
      for (int64_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
    }
    for (double& v : sum.values()) v = (v + noise_std * rng.NextNormal()) * scale;
    out.push_back(std::move(sum));
  }
  return out;
}

}  // namespace lvae::training
