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

#ifndef LVAE_NN_LAYER_H_
#define LVAE_NN_LAYER_H_

#include <cstdint>
#include <optional>
#include <string_view>

#include "lvae/tensor/conv.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tape.h"
#include "lvae/tensor/tensor.h"

namespace lvae::nn {

enum class Activation { kNone, kRelu, kSigmoid, kExp };
enum class LayerKind { kDense, kConv2D, kConv2DTranspose };

std::string_view ActivationName(Activation activation);
std::string_view LayerKindName(LayerKind kind);

// True for activations with Lipschitz constant at most 1.
bool IsOneLipschitz(Activation activation);

Var Activate(Activation activation, const Var& x);

// Spectral-norm state: a unit vector in the layer's per-example input space,
// carried across power-iteration steps.
struct SpectralState {
  Tensor u;
  int64_t iterations = 0;
};

// An affine map followed by an activation. Inputs are batched; a layer
// reshapes its input to [B, input_shape...] so dense and convolutional layers
// chain without explicit flatten/reshape layers.
//
// Weight layouts: dense [in, out] (row-vector convention y = x W + b);
// conv2d [kh, kw, in_c, out_c]; conv2d_transpose [kh, kw, out_c, in_c], i.e.
// the kernel of the adjoint convolution from the output image to the input.
class Layer {
 public:
  static Layer Dense(int64_t in, int64_t out, Activation activation,
                     RngStream& init);
  // input_shape {h, w, in_c}; output {ceil(h/s), ceil(w/s), out_c} for same
  // padding.
  static Layer Conv2D(const Shape& input_shape, int64_t out_c, int64_t kernel,
                      int64_t stride, Padding padding, Activation activation,
                      RngStream& init);
  // input_shape {h, w, in_c}; output extent TransposedExtent(h, ...).
  static Layer Conv2DTranspose(const Shape& input_shape, int64_t out_c,
                               int64_t kernel, int64_t stride, Padding padding,
                               Activation activation, RngStream& init);

  LayerKind kind() const { return kind_; }
  Activation activation() const { return activation_; }
  int64_t stride() const { return stride_; }
  Padding padding() const { return padding_; }
  // Per-example shapes, without the batch dimension.
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  int64_t input_size() const { return NumElements(input_shape_); }
  int64_t output_size() const { return NumElements(output_shape_); }

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  Tensor& mutable_weight() { return weight_; }
  Tensor& mutable_bias() { return bias_; }

  const std::optional<SpectralState>& spectral_state() const { return spectral_; }
  std::optional<SpectralState>& mutable_spectral_state() { return spectral_; }

  // The linear part x -> x W (or its convolutional analogue) for a batch x,
  // with an explicit weight so callers can substitute a rescaled one.
  Var Linear(const Var& x, const Var& weight) const;
  // Adjoint of Linear in x, evaluated on constants: [B, output] -> [B, input].
  Tensor LinearAdjoint(const Tensor& y, const Tensor& weight) const;

  // activation(Linear(x, weight) + bias).
  Var Forward(const Var& x, const Var& weight, const Var& bias) const;

  void set_activation(Activation activation) { activation_ = activation; }

 private:
  Layer() = default;

  LayerKind kind_ = LayerKind::kDense;
  Activation activation_ = Activation::kNone;
  int64_t stride_ = 1;
  Padding padding_ = Padding::kSame;
  Shape input_shape_;
  Shape output_shape_;
  Tensor weight_;
  Tensor bias_;
  std::optional<SpectralState> spectral_;
};

}  // namespace lvae::nn

#endif  // LVAE_NN_LAYER_H_
