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

#ifndef LVAE_TENSOR_OPS_H_
#define LVAE_TENSOR_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "lvae/tensor/conv.h"
#include "lvae/tensor/tape.h"
#include "lvae/tensor/tensor.h"

// Differentiable primitives. Binary elementwise ops accept equal shapes or a
// single-element operand broadcast against the other. Unless noted, each op's
// backward is built from ops in this file and is itself differentiable.
namespace lvae {

Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Neg(const Var& x);
Var Scale(const Var& x, double factor);
Var AddScalar(const Var& x, double offset);

Var Exp(const Var& x);
// Checked mode rejects non-positive inputs.
Var Log(const Var& x);
// Derivative at 0 is 0; second derivative is 0 everywhere.
Var Relu(const Var& x);
Var Sigmoid(const Var& x);
Var Square(const Var& x);
// Checked mode rejects negative inputs.
Var Sqrt(const Var& x);
Var Reciprocal(const Var& x);

enum class ElementwiseOp { kAdd, kSub, kMul, kExp, kLog, kRelu, kSigmoid, kSquare };
// Dispatches to the op above; `inputs` holds one or two operands.
Var Elementwise(ElementwiseOp op, std::span<const Var> inputs);

// 2-D product op(a) * op(b), where op transposes when requested.
Var MatMul(const Var& a, const Var& b, bool transpose_a = false,
           bool transpose_b = false);

// x: [..., C] plus bias: [C] broadcast over the leading dimensions.
Var AddBias(const Var& x, const Var& bias);
// Sum over all leading dimensions: [..., C] -> [C].
Var SumToLastDim(const Var& x);
// [C] -> `shape` with last extent C, repeating over the leading dimensions.
Var BroadcastLastDim(const Var& bias, const Shape& shape);

Var Reshape(const Var& x, const Shape& shape);

enum class ReduceOp { kSum, kMean };
// Reduces over `axes` (dropped from the result shape).
Var Reduce(ReduceOp op, const Var& x, std::span<const int> axes);
Var Sum(const Var& x, std::span<const int> axes);
Var Mean(const Var& x, std::span<const int> axes);
Var SumAll(const Var& x);
Var MeanAll(const Var& x);
// Inverse of Sum over `axes`: repeats `x` to fill `shape`.
Var BroadcastAlong(const Var& x, const Shape& shape, std::span<const int> axes);

// Columns [begin, begin + length) of the last dimension.
Var SliceLastDim(const Var& x, int64_t begin, int64_t length);
// Embeds x into a zero tensor whose last extent is `total`, at `begin`.
Var PadLastDim(const Var& x, int64_t begin, int64_t total);

// Cross-correlation, NHWC input and [kh, kw, Cin, Cout] kernel.
Var Conv2D(const Var& x, const Var& kernel, int64_t stride, Padding padding);
// Adjoint of Conv2D in its input: y [B, h, w, Cout] -> [B, out_h, out_w, Cin]
// where Conv2D on an out_h x out_w image has output extent h x w.
Var Conv2DTranspose(const Var& y, const Var& kernel, int64_t stride,
                    Padding padding, int64_t out_h, int64_t out_w);
// Adjoint of Conv2D in its kernel.
Var Conv2DKernelGrad(const Var& x, const Var& y, int64_t kernel_h,
                     int64_t kernel_w, int64_t stride, Padding padding);

// Elementwise binary cross-entropy between sigmoid(logits) and fixed targets,
// computed stably. First-order only.
Var BceWithLogits(const Var& logits, const Tensor& targets);

}  // namespace lvae

#endif  // LVAE_TENSOR_OPS_H_
