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

#include "lvae/nn/network.h"

#include <cmath>
#include <string>

#include "lvae/nn/spectral_norm.h"
#include "lvae/tensor/ops.h"

namespace lvae::nn {

std::string_view LipschitzModeName(LipschitzMode mode) {
  switch (mode) {
    case LipschitzMode::kNone:
      return "none";
    case LipschitzMode::kSpectralNorm:
      return "spectral_norm";
    case LipschitzMode::kGradientPenalty:
      return "gradient_penalty";
  }
  return "?";
}

Network::Network(std::vector<Layer> layers, LipschitzMode mode, double L)
    : layers_(std::move(layers)), mode_(mode), L_(L) {
  if (layers_.empty()) throw TensorError("network needs at least one layer");
  if (!(L > 0.0)) throw TensorError("Lipschitz constant must be positive");
  for (size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].input_size() != layers_[i - 1].output_size()) {
      throw TensorError("layer " + std::to_string(i) + " expects " +
                        ShapeToString(layers_[i].input_shape()) + " but receives " +
                        ShapeToString(layers_[i - 1].output_shape()));
    }
  }
  layer_scale_ = std::pow(L, 1.0 / static_cast<double>(layers_.size()));
}

std::vector<const Tensor*> Network::Parameters() const {
  std::vector<const Tensor*> out;
  for (const Layer& l : layers_) {
    out.push_back(&l.weight());
    out.push_back(&l.bias());
  }
  return out;
}

std::vector<Tensor*> Network::MutableParameters() {
  std::vector<Tensor*> out;
  for (Layer& l : layers_) {
    out.push_back(&l.mutable_weight());
    out.push_back(&l.mutable_bias());
  }
  return out;
}

std::vector<std::string> Network::ParameterNames(std::string_view prefix) const {
  std::vector<std::string> out;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const std::string base = std::string(prefix) + "." + std::to_string(i) + ".";
    out.push_back(base + "weight");
    out.push_back(base + "bias");
  }
  return out;
}

std::vector<Var> Network::Bind(Tape& tape) const {
  std::vector<Var> out;
  for (const Tensor* p : Parameters()) out.push_back(tape.Leaf(*p));
  return out;
}

Var Network::EffectiveWeight(int i, const Var& weight) const {
  if (mode_ != LipschitzMode::kSpectralNorm) return weight;
  const Var sigma = SpectralSigma(layers_[i], weight);
  if (!(sigma.value().item() > 0.0)) {
    throw TensorError("spectral norm of layer " + std::to_string(i) + " is zero");
  }
  return Mul(weight, Scale(Reciprocal(sigma), layer_scale_));
}

Var Network::Forward(const Var& x, std::span<const Var> params) const {
  if (static_cast<int>(params.size()) != num_parameters()) {
    throw TensorError("network expects " + std::to_string(num_parameters()) +
                      " parameters");
  }
  Var h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].Forward(h, EffectiveWeight(static_cast<int>(i), params[2 * i]),
                           params[2 * i + 1]);
  }
  const int64_t batch = x.size() / layers_.front().input_size();
  Shape out = {batch};
  out.insert(out.end(), output_shape().begin(), output_shape().end());
  return h.shape() == out ? h : Reshape(h, out);
}

Tensor Network::Forward(const Tensor& x) const {
  NoGradGuard no_grad;
  std::vector<Var> params;
  for (const Tensor* p : Parameters()) params.push_back(Var::Constant(*p));
  return Forward(Var::Constant(x), params).value();
}

void Network::PowerStep(int iterations, RngStream& rng) {
  if (mode_ != LipschitzMode::kSpectralNorm) return;
  for (size_t i = 0; i < layers_.size(); ++i) {
    RngStream layer_rng = rng.Fork("layer" + std::to_string(i));
    RefineSpectralState(layers_[i], iterations, layer_rng);
  }
}

Network BuildLipschitzDecoder(std::vector<Layer> layers,
                              const LipschitzDecoderConfig& config,
                              RngStream& rng) {
  for (size_t i = 0; i < layers.size(); ++i) {
    if (!IsOneLipschitz(layers[i].activation())) {
      throw TensorError("layer " + std::to_string(i) + " activation '" +
                        std::string(ActivationName(layers[i].activation())) +
                        "' is not 1-Lipschitz");
    }
  }
  Network net(std::move(layers), config.mode, config.L);
  net.PowerStep(kEvalPowerSteps, rng);
  return net;
}

}  // namespace lvae::nn
