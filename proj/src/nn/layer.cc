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

#include "lvae/nn/layer.h"

#include <cmath>
#include <string>

#include "lvae/tensor/ops.h"

namespace lvae::nn {
namespace {

// Glorot/Xavier uniform.
Tensor GlorotUniform(const Shape& shape, int64_t fan_in, int64_t fan_out,
                     RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return RandomUniform(shape, -limit, limit, rng);
}

void CheckImageShape(const Shape& s) {
  if (s.size() != 3 || s[0] < 1 || s[1] < 1 || s[2] < 1) {
    throw TensorError("convolutional layer input must be {h, w, c}, got " +
                      ShapeToString(s));
  }
}

}  // namespace

std::string_view ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kNone:
      return "none";
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kExp:
      return "exp";
  }
  return "?";
}

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kConv2D:
      return "conv2d";
    case LayerKind::kConv2DTranspose:
      return "conv2d_transpose";
  }
  return "?";
}

bool IsOneLipschitz(Activation activation) {
  return activation != Activation::kExp;
}

Var Activate(Activation activation, const Var& x) {
  switch (activation) {
    case Activation::kNone:
      return x;
    case Activation::kRelu:
      return Relu(x);
    case Activation::kSigmoid:
      return Sigmoid(x);
    case Activation::kExp:
      return Exp(x);
  }
  return x;
}

Layer Layer::Dense(int64_t in, int64_t out, Activation activation,
                   RngStream& init) {
  if (in < 1 || out < 1) throw TensorError("dense layer extents must be positive");
  Layer l;
  l.kind_ = LayerKind::kDense;
  l.activation_ = activation;
  l.input_shape_ = {in};
  l.output_shape_ = {out};
  l.weight_ = GlorotUniform({in, out}, in, out, init);
  l.bias_ = Tensor({out});
  return l;
}

Layer Layer::Conv2D(const Shape& input_shape, int64_t out_c, int64_t kernel,
                    int64_t stride, Padding padding, Activation activation,
                    RngStream& init) {
  CheckImageShape(input_shape);
  const ConvGeometry g = ConvGeometry::Make(input_shape[0], input_shape[1],
                                            kernel, kernel, stride, padding);
  const int64_t in_c = input_shape[2];
  Layer l;
  l.kind_ = LayerKind::kConv2D;
  l.activation_ = activation;
  l.stride_ = stride;
  l.padding_ = padding;
  l.input_shape_ = input_shape;
  l.output_shape_ = {g.out_h, g.out_w, out_c};
  l.weight_ = GlorotUniform({kernel, kernel, in_c, out_c}, kernel * kernel * in_c,
                            kernel * kernel * out_c, init);
  l.bias_ = Tensor({out_c});
  return l;
}

Layer Layer::Conv2DTranspose(const Shape& input_shape, int64_t out_c,
                             int64_t kernel, int64_t stride, Padding padding,
                             Activation activation, RngStream& init) {
  CheckImageShape(input_shape);
  const int64_t out_h = TransposedExtent(input_shape[0], kernel, stride, padding);
  const int64_t out_w = TransposedExtent(input_shape[1], kernel, stride, padding);
  const ConvGeometry g =
      ConvGeometry::Make(out_h, out_w, kernel, kernel, stride, padding);
  if (g.out_h != input_shape[0] || g.out_w != input_shape[1]) {
    throw TensorError("inconsistent transposed-convolution geometry");
  }
  const int64_t in_c = input_shape[2];
  Layer l;
  l.kind_ = LayerKind::kConv2DTranspose;
  l.activation_ = activation;
  l.stride_ = stride;
  l.padding_ = padding;
  l.input_shape_ = input_shape;
  l.output_shape_ = {out_h, out_w, out_c};
  l.weight_ = GlorotUniform({kernel, kernel, out_c, in_c}, kernel * kernel * in_c,
                            kernel * kernel * out_c, init);
  l.bias_ = Tensor({out_c});
  return l;
}

Var Layer::Linear(const Var& x, const Var& weight) const {
  const int64_t in = input_size();
  if (x.size() % in != 0 || x.value().rank() < 1) {
    throw TensorError(std::string(LayerKindName(kind_)) + " layer expects " +
                      ShapeToString(input_shape_) + " per example, got " +
                      ShapeToString(x.shape()));
  }
  const int64_t batch = x.size() / in;
  Shape batched = {batch};
  batched.insert(batched.end(), input_shape_.begin(), input_shape_.end());
  const Var xb = x.shape() == batched ? x : Reshape(x, batched);
  switch (kind_) {
    case LayerKind::kDense:
      return MatMul(xb, weight);
    case LayerKind::kConv2D:
      return lvae::Conv2D(xb, weight, stride_, padding_);
    case LayerKind::kConv2DTranspose:
      return lvae::Conv2DTranspose(xb, weight, stride_, padding_,
                                   output_shape_[0], output_shape_[1]);
  }
  throw TensorError("unknown layer kind");
}

Tensor Layer::LinearAdjoint(const Tensor& y, const Tensor& weight) const {
  NoGradGuard no_grad;
  const int64_t batch = y.size() / output_size();
  Shape batched = {batch};
  batched.insert(batched.end(), output_shape_.begin(), output_shape_.end());
  const Var yb = Var::Constant(y.Reshaped(batched));
  const Var w = Var::Constant(weight);
  switch (kind_) {
    case LayerKind::kDense:
      return MatMul(yb, w, false, true).value();
    case LayerKind::kConv2D:
      return lvae::Conv2DTranspose(yb, w, stride_, padding_, input_shape_[0],
                                   input_shape_[1])
          .value();
    case LayerKind::kConv2DTranspose:
      return lvae::Conv2D(yb, w, stride_, padding_).value();
  }
  throw TensorError("unknown layer kind");
}

Var Layer::Forward(const Var& x, const Var& weight, const Var& bias) const {
  return Activate(activation_, AddBias(Linear(x, weight), bias));
}

}  // namespace lvae::nn
