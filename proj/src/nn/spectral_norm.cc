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

#include "lvae/nn/spectral_norm.h"

#include <cmath>

#include "lvae/tensor/kernels.h"
#include "lvae/tensor/ops.h"

namespace lvae::nn {
namespace {

double Norm(const Tensor& t) { return std::sqrt(kernels::Dot(t.values(), t.values())); }

Tensor Scaled(Tensor t, double factor) {
  for (double& v : t.values()) v *= factor;
  return t;
}

Shape Batched(const Shape& per_example) {
  Shape s = {1};
  s.insert(s.end(), per_example.begin(), per_example.end());
  return s;
}

}  // namespace

PowerIterationResult PowerIteration(const LinearMap& map, const Tensor& u0,
                                    int iterations) {
  if (iterations < 1) throw TensorError("power iteration needs iterations >= 1");
  const double n0 = Norm(u0);
  if (!(n0 > 0.0)) throw TensorError("power iteration needs a non-zero start");
  PowerIterationResult r{0.0, Scaled(u0, 1.0 / n0)};
  for (int k = 0; k < iterations; ++k) {
    const Tensor w = map.apply(r.u);
    if (Norm(w) == 0.0) return {0.0, r.u};
    const Tensor v = map.adjoint(w);
    const double nv = Norm(v);
    if (nv == 0.0) return {0.0, r.u};
    r.u = Scaled(v, 1.0 / nv);
  }
  r.sigma = Norm(map.apply(r.u));
  return r;
}

LinearMap LayerOperator(const Layer& layer, const Tensor& weight) {
  const Shape in = layer.input_shape();
  const Shape out = layer.output_shape();
  LinearMap map;
  map.apply = [&layer, weight, in, out](const Tensor& x) {
    NoGradGuard no_grad;
    return layer.Linear(Var::Constant(x.Reshaped(Batched(in))), Var::Constant(weight))
        .value()
        .Reshaped(out);
  };
  map.adjoint = [&layer, weight, in](const Tensor& y) {
    return layer.LinearAdjoint(y, weight).Reshaped(in);
  };
  return map;
}

double RefineSpectralState(Layer& layer, int iterations, RngStream& rng) {
  auto& state = layer.mutable_spectral_state();
  if (!state) state = SpectralState{RandomNormal(layer.input_shape(), rng), 0};
  const PowerIterationResult r =
      PowerIteration(LayerOperator(layer, layer.weight()), state->u, iterations);
  state->u = r.u;
  state->iterations += iterations;
  return r.sigma;
}

Var SpectralSigma(const Layer& layer, const Var& weight) {
  if (!layer.spectral_state()) throw TensorError("layer has no spectral state");
  const Var u = Var::Constant(
      layer.spectral_state()->u.Reshaped(Batched(layer.input_shape())));
  return Sqrt(SumAll(Square(layer.Linear(u, weight))));
}

Layer SpectralNormalize(const Layer& layer, int iterations) {
  if (!layer.spectral_state()) throw TensorError("layer has no spectral state");
  Layer out = layer;
  RngStream unused(0, "spectral_normalize");
  const double sigma = RefineSpectralState(out, iterations, unused);
  if (!(sigma > 0.0)) throw TensorError("cannot normalise an all-zero weight");
  out.mutable_weight() = Scaled(out.weight(), 1.0 / sigma);
  return out;
}

}  // namespace lvae::nn
