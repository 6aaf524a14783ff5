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

#ifndef LVAE_NN_NETWORK_H_
#define LVAE_NN_NETWORK_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lvae/nn/layer.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tape.h"

namespace lvae::nn {

enum class LipschitzMode { kNone, kSpectralNorm, kGradientPenalty };

std::string_view LipschitzModeName(LipschitzMode mode);

struct LipschitzDecoderConfig {
  double L = 1.0;
  LipschitzMode mode = LipschitzMode::kNone;
};

// Power-iteration budgets: one warm-started step per training iteration, and
// a longer refinement before any evaluation or export.
inline constexpr int kTrainPowerSteps = 1;
inline constexpr int kEvalPowerSteps = 50;

// A chain of layers. In spectral-norm mode every layer's weight is replaced
// by W * scale / sigma(W) with scale = L^(1/n), so the chain is L-Lipschitz
// up to the accuracy of the sigma estimates.
class Network {
 public:
  Network() = default;
  Network(std::vector<Layer> layers, LipschitzMode mode, double L);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  LipschitzMode mode() const { return mode_; }
  double L() const { return L_; }
  double layer_scale() const { return layer_scale_; }
  const Shape& input_shape() const { return layers_.front().input_shape(); }
  const Shape& output_shape() const { return layers_.back().output_shape(); }

  // Two parameters per layer, weight then bias.
  int num_parameters() const { return 2 * static_cast<int>(layers_.size()); }
  std::vector<const Tensor*> Parameters() const;
  std::vector<Tensor*> MutableParameters();
  std::vector<std::string> ParameterNames(std::string_view prefix) const;

  // Registers every parameter as a leaf of `tape`.
  std::vector<Var> Bind(Tape& tape) const;

  // Batched forward pass with explicit parameters (from Bind, or constants).
  Var Forward(const Var& x, std::span<const Var> params) const;
  // Forward pass on the stored parameters without recording.
  Tensor Forward(const Tensor& x) const;

  // The weight actually applied by layer i: W, or W * scale / sigma in
  // spectral-norm mode.
  Var EffectiveWeight(int i, const Var& weight) const;

  // Advances every layer's power iteration (spectral-norm mode only).
  void PowerStep(int iterations, RngStream& rng);

 private:
  std::vector<Layer> layers_;
  LipschitzMode mode_ = LipschitzMode::kNone;
  double L_ = 1.0;
  double layer_scale_ = 1.0;
};

// Validates that every activation is 1-Lipschitz and assembles the decoder.
// Spectral state is created for every layer in spectral-norm mode.
Network BuildLipschitzDecoder(std::vector<Layer> layers,
                              const LipschitzDecoderConfig& config,
                              RngStream& rng);

}  // namespace lvae::nn

#endif  // LVAE_NN_NETWORK_H_
