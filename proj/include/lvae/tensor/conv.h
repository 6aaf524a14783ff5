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

#ifndef LVAE_TENSOR_CONV_H_
#define LVAE_TENSOR_CONV_H_

#include <cstdint>

#include "lvae/tensor/tensor.h"

namespace lvae {

enum class Padding { kSame, kValid };

// Geometry of a 2-D cross-correlation from a "large" NHWC image (in_h x in_w)
// to a "small" one (out_h x out_w). Same padding yields ceil(in / stride)
// output extent, with the total padding split so the extra row/column goes
// to the bottom/right.
struct ConvGeometry {
  int64_t in_h = 0, in_w = 0;
  int64_t kernel_h = 0, kernel_w = 0;
  int64_t stride = 1;
  Padding padding = Padding::kSame;
  int64_t out_h = 0, out_w = 0;
  int64_t pad_top = 0, pad_left = 0;

  // Throws TensorError on stride < 1 or a kernel that does not fit.
  static ConvGeometry Make(int64_t in_h, int64_t in_w, int64_t kernel_h,
                           int64_t kernel_w, int64_t stride, Padding padding);
};

// Output extent of a transposed convolution whose adjoint convolution has the
// given parameters: in * stride for same padding, (in - 1) * stride + kernel
// for valid padding.
int64_t TransposedExtent(int64_t in, int64_t kernel, int64_t stride,
                         Padding padding);

// x: [B, in_h, in_w, Cin], kernel: [kh, kw, Cin, Cout] -> [B, out_h, out_w, Cout]
Tensor Conv2DForward(const Tensor& x, const Tensor& kernel,
                     const ConvGeometry& geometry);

// Adjoint of Conv2DForward in its first argument.
// y: [B, out_h, out_w, Cout] -> [B, in_h, in_w, Cin]
Tensor Conv2DTransposeForward(const Tensor& y, const Tensor& kernel,
                              const ConvGeometry& geometry);

// Adjoint of Conv2DForward in the kernel argument:
// <Conv2DForward(x, k), y> == <k, Conv2DKernelGradForward(x, y)>.
Tensor Conv2DKernelGradForward(const Tensor& x, const Tensor& y,
                               const ConvGeometry& geometry);

}  // namespace lvae

#endif  // LVAE_TENSOR_CONV_H_
