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

#ifndef LVAE_NN_SPECTRAL_NORM_H_
#define LVAE_NN_SPECTRAL_NORM_H_

#include <functional>

#include "lvae/nn/layer.h"
#include "lvae/tensor/tensor.h"

namespace lvae::nn {

// A linear operator given by its action and the action of its adjoint.
struct LinearMap {
  std::function<Tensor(const Tensor&)> apply;
  std::function<Tensor(const Tensor&)> adjoint;
};

struct PowerIterationResult {
  double sigma = 0.0;  // ||A u|| for the returned u
  Tensor u;            // unit norm
};

// Power iteration on A^T A starting from u0 (any non-zero vector). The
// estimate ||A u_k|| is non-decreasing in k and bounded by the operator
// 2-norm. If A u vanishes the map is treated as zero: sigma is 0 and u0 is
// returned normalised.
PowerIterationResult PowerIteration(const LinearMap& map, const Tensor& u0,
                                    int iterations);

// The layer's linear part on a single example, for the given weight.
LinearMap LayerOperator(const Layer& layer, const Tensor& weight);

// Runs `iterations` power steps on the layer's current weight, warm-started
// from (and updating) its spectral state. Creates the state from `rng` if
// absent. Returns the estimate.
double RefineSpectralState(Layer& layer, int iterations, RngStream& rng);

// ||A u|| as a differentiable function of the weight, with u taken from the
// layer's spectral state and held constant.
Var SpectralSigma(const Layer& layer, const Var& weight);

// A copy of `layer` whose weight is divided by its estimated spectral norm
// after `iterations` further power steps. Throws TensorError on all-zero
// weights or a layer without spectral state.
Layer SpectralNormalize(const Layer& layer, int iterations = 50);

}  // namespace lvae::nn

#endif  // LVAE_NN_SPECTRAL_NORM_H_
