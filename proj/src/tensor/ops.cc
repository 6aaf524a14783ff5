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

#include "lvae/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "lvae/tensor/kernels.h"

namespace lvae {
namespace {

using internal::MakeResult;
using Needs = std::span<const bool>;

enum class Broadcast { kSameShape, kScalarRight, kScalarLeft };

Broadcast ResolveBroadcast(const char* op, const Var& a, const Var& b) {
  if (a.shape() == b.shape()) return Broadcast::kSameShape;
  if (b.size() == 1) return Broadcast::kScalarRight;
  if (a.size() == 1) return Broadcast::kScalarLeft;
  throw TensorError(std::string(op) + ": incompatible shapes " +
                    ShapeToString(a.shape()) + " and " +
                    ShapeToString(b.shape()));
}

template <typename F>
Tensor MapUnary(const Tensor& x, F f) {
  Tensor out(x.shape());
  const double* in = x.data();
  double* o = out.data();
  for (int64_t i = 0; i < x.size(); ++i) o[i] = f(in[i]);
  return out;
}

// Reduces the gradient of a broadcast single-element operand.
Var CollapseTo(const Var& g, const Shape& shape) {
  return Reshape(SumAll(g), shape);
}

// Holder that lets a backward closure refer to the op's own output.
struct OutputRef {
  Var var;
};

Var Finish(std::shared_ptr<OutputRef> ref, Var out) {
  ref->var = out;
  return out;
}

std::vector<int> NormalizeAxes(std::span<const int> axes, int rank) {
  std::vector<int> out;
  for (int a : axes) {
    if (a < 0) a += rank;
    if (a < 0 || a >= rank) throw TensorError("reduction axis out of range");
    out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Shape ReducedShape(const Shape& shape, const std::vector<int>& axes) {
  Shape out;
  for (int d = 0; d < static_cast<int>(shape.size()); ++d) {
    if (!std::binary_search(axes.begin(), axes.end(), d)) out.push_back(shape[d]);
  }
  return out;
}

// Walks every element of `full` and calls visit(full_index, reduced_index).
template <typename F>
void ForEachReduced(const Shape& full, const std::vector<int>& axes, F visit) {
  const int rank = static_cast<int>(full.size());
  std::vector<int64_t> reduced_stride(rank, 0);
  int64_t stride = 1;
  for (int d = rank - 1; d >= 0; --d) {
    if (!std::binary_search(axes.begin(), axes.end(), d)) {
      reduced_stride[d] = stride;
      stride *= full[d];
    }
  }
  const int64_t total = NumElements(full);
  std::vector<int64_t> index(rank, 0);
  int64_t reduced = 0;
  for (int64_t i = 0; i < total; ++i) {
    visit(i, reduced);
    for (int d = rank - 1; d >= 0; --d) {
      ++index[d];
      reduced += reduced_stride[d];
      if (index[d] < full[d]) break;
      reduced -= reduced_stride[d] * index[d];
      index[d] = 0;
    }
  }
}

Var ReluGrad(const Var& g, const Var& x) {
  Tensor out(g.shape());
  kernels::ReluMask(x.value().values(), g.value().values(), out.values());
  return MakeResult("relu_grad", std::move(out), {g},
                    [x](const Var& gg, Needs) -> std::vector<Var> {
                      return {ReluGrad(gg, x)};
                    });
}

}  // namespace

Var Add(const Var& a, const Var& b) {
  const Broadcast form = ResolveBroadcast("add", a, b);
  Tensor out;
  switch (form) {
    case Broadcast::kSameShape:
      out = Tensor(a.shape());
      kernels::Add(a.value().values(), b.value().values(), out.values());
      break;
    case Broadcast::kScalarRight: {
      const double s = b.value()[0];
      out = MapUnary(a.value(), [s](double v) { return v + s; });
      break;
    }
    case Broadcast::kScalarLeft: {
      const double s = a.value()[0];
      out = MapUnary(b.value(), [s](double v) { return s + v; });
      break;
    }
  }
  return MakeResult("add", std::move(out), {a, b},
                    [a, b, form](const Var& g, Needs needs) -> std::vector<Var> {
                      Var ga, gb;
                      if (needs[0]) {
                        ga = form == Broadcast::kScalarLeft ? CollapseTo(g, a.shape()) : g;
                      }
                      if (needs[1]) {
                        gb = form == Broadcast::kScalarRight ? CollapseTo(g, b.shape()) : g;
                      }
                      return {ga, gb};
                    });
}

Var Sub(const Var& a, const Var& b) {
  const Broadcast form = ResolveBroadcast("sub", a, b);
  Tensor out;
  switch (form) {
    case Broadcast::kSameShape: {
      out = Tensor(a.shape());
      const double* x = a.value().data();
      const double* y = b.value().data();
      double* o = out.data();
      for (int64_t i = 0; i < out.size(); ++i) o[i] = x[i] - y[i];
      break;
    }
    case Broadcast::kScalarRight: {
      const double s = b.value()[0];
      out = MapUnary(a.value(), [s](double v) { return v - s; });
      break;
    }
    case Broadcast::kScalarLeft: {
      const double s = a.value()[0];
      out = MapUnary(b.value(), [s](double v) { return s - v; });
      break;
    }
  }
  return MakeResult("sub", std::move(out), {a, b},
                    [a, b, form](const Var& g, Needs needs) -> std::vector<Var> {
                      Var ga, gb;
                      if (needs[0]) {
                        ga = form == Broadcast::kScalarLeft ? CollapseTo(g, a.shape()) : g;
                      }
                      if (needs[1]) {
                        gb = form == Broadcast::kScalarRight ? CollapseTo(Neg(g), b.shape())
                                                             : Neg(g);
                      }
                      return {ga, gb};
                    });
}

Var Mul(const Var& a, const Var& b) {
  const Broadcast form = ResolveBroadcast("mul", a, b);
  Tensor out;
  switch (form) {
    case Broadcast::kSameShape:
      out = Tensor(a.shape());
      kernels::Mul(a.value().values(), b.value().values(), out.values());
      break;
    case Broadcast::kScalarRight: {
      const double s = b.value()[0];
      out = MapUnary(a.value(), [s](double v) { return v * s; });
      break;
    }
    case Broadcast::kScalarLeft: {
      const double s = a.value()[0];
      out = MapUnary(b.value(), [s](double v) { return s * v; });
      break;
    }
  }
  return MakeResult("mul", std::move(out), {a, b},
                    [a, b, form](const Var& g, Needs needs) -> std::vector<Var> {
                      Var ga, gb;
                      if (needs[0]) {
                        ga = form == Broadcast::kScalarLeft ? CollapseTo(Mul(g, b), a.shape())
                                                            : Mul(g, b);
                      }
                      if (needs[1]) {
                        gb = form == Broadcast::kScalarRight ? CollapseTo(Mul(g, a), b.shape())
                                                             : Mul(g, a);
                      }
                      return {ga, gb};
                    });
}

Var Neg(const Var& x) { return Scale(x, -1.0); }

Var Scale(const Var& x, double factor) {
  Tensor out = MapUnary(x.value(), [factor](double v) { return v * factor; });
  return MakeResult("scale", std::move(out), {x},
                    [factor](const Var& g, Needs) -> std::vector<Var> {
                      return {Scale(g, factor)};
                    });
}

Var AddScalar(const Var& x, double offset) {
  Tensor out = MapUnary(x.value(), [offset](double v) { return v + offset; });
  return MakeResult("add_scalar", std::move(out), {x},
                    [](const Var& g, Needs) -> std::vector<Var> { return {g}; });
}

Var Exp(const Var& x) {
  auto ref = std::make_shared<OutputRef>();
  Tensor out = MapUnary(x.value(), [](double v) { return std::exp(v); });
  return Finish(ref, MakeResult("exp", std::move(out), {x},
                                [ref](const Var& g, Needs) -> std::vector<Var> {
                                  return {Mul(g, ref->var)};
                                }));
}

Var Log(const Var& x) {
  if (CheckedMode()) {
    for (double v : x.value().values()) {
      if (!(v > 0.0)) throw TensorError("log of non-positive value");
    }
  }
  Tensor out = MapUnary(x.value(), [](double v) { return std::log(v); });
  return MakeResult("log", std::move(out), {x},
                    [x](const Var& g, Needs) -> std::vector<Var> {
                      return {Mul(g, Reciprocal(x))};
                    });
}

Var Relu(const Var& x) {
  Tensor out(x.shape());
  kernels::Relu(x.value().values(), out.values());
  return MakeResult("relu", std::move(out), {x},
                    [x](const Var& g, Needs) -> std::vector<Var> {
                      return {ReluGrad(g, x)};
                    });
}

Var Sigmoid(const Var& x) {
  auto ref = std::make_shared<OutputRef>();
  Tensor out = MapUnary(x.value(), [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return Finish(ref, MakeResult("sigmoid", std::move(out), {x},
                                [ref](const Var& g, Needs) -> std::vector<Var> {
                                  const Var& y = ref->var;
                                  return {Mul(g, Mul(y, AddScalar(Neg(y), 1.0)))};
                                }));
}

Var Square(const Var& x) {
  Tensor out(x.shape());
  kernels::Mul(x.value().values(), x.value().values(), out.values());
  return MakeResult("square", std::move(out), {x},
                    [x](const Var& g, Needs) -> std::vector<Var> {
                      return {Mul(g, Scale(x, 2.0))};
                    });
}

Var Sqrt(const Var& x) {
  if (CheckedMode()) {
    for (double v : x.value().values()) {
      if (v < 0.0) throw TensorError("sqrt of negative value");
    }
  }
  auto ref = std::make_shared<OutputRef>();
  Tensor out = MapUnary(x.value(), [](double v) { return std::sqrt(v); });
  return Finish(ref, MakeResult("sqrt", std::move(out), {x},
                                [ref](const Var& g, Needs) -> std::vector<Var> {
                                  return {Mul(g, Scale(Reciprocal(ref->var), 0.5))};
                                }));
}

Var Reciprocal(const Var& x) {
  auto ref = std::make_shared<OutputRef>();
  Tensor out = MapUnary(x.value(), [](double v) { return 1.0 / v; });
  return Finish(ref, MakeResult("reciprocal", std::move(out), {x},
                                [ref](const Var& g, Needs) -> std::vector<Var> {
                                  return {Mul(g, Neg(Square(ref->var)))};
                                }));
}

Var Elementwise(ElementwiseOp op, std::span<const Var> inputs) {
  const size_t arity =
      (op == ElementwiseOp::kAdd || op == ElementwiseOp::kSub ||
       op == ElementwiseOp::kMul)
          ? 2
          : 1;
  if (inputs.size() != arity) {
    throw TensorError("elementwise op expects " + std::to_string(arity) +
                      " inputs");
  }
  switch (op) {
    case ElementwiseOp::kAdd:
      return Add(inputs[0], inputs[1]);
    case ElementwiseOp::kSub:
      return Sub(inputs[0], inputs[1]);
    case ElementwiseOp::kMul:
      return Mul(inputs[0], inputs[1]);
    case ElementwiseOp::kExp:
      return Exp(inputs[0]);
    case ElementwiseOp::kLog:
      return Log(inputs[0]);
    case ElementwiseOp::kRelu:
      return Relu(inputs[0]);
    case ElementwiseOp::kSigmoid:
      return Sigmoid(inputs[0]);
    case ElementwiseOp::kSquare:
      return Square(inputs[0]);
  }
  throw TensorError("unknown elementwise op");
}

Var MatMul(const Var& a, const Var& b, bool transpose_a, bool transpose_b) {
  if (a.value().rank() != 2 || b.value().rank() != 2) {
    throw TensorError("matmul expects rank-2 operands, got " +
                      ShapeToString(a.shape()) + " and " +
                      ShapeToString(b.shape()));
  }
  const int64_t m = transpose_a ? a.shape()[1] : a.shape()[0];
  const int64_t k = transpose_a ? a.shape()[0] : a.shape()[1];
  const int64_t kb = transpose_b ? b.shape()[1] : b.shape()[0];
  const int64_t n = transpose_b ? b.shape()[0] : b.shape()[1];
  if (k != kb) {
    throw TensorError("matmul inner dimensions disagree: " +
                      ShapeToString(a.shape()) + " and " +
                      ShapeToString(b.shape()));
  }
  Tensor out({m, n});
  kernels::Gemm(1.0, {a.value().data(), m, k, a.shape()[1], transpose_a},
                {b.value().data(), k, n, b.shape()[1], transpose_b}, 0.0,
                {out.data(), m, n, n});
  return MakeResult(
      "matmul", std::move(out), {a, b},
      [a, b, transpose_a, transpose_b](const Var& g, Needs needs) -> std::vector<Var> {
        Var ga, gb;
        if (needs[0]) {
          if (!transpose_a) {
            ga = MatMul(g, b, false, !transpose_b);
          } else {
            ga = MatMul(b, g, transpose_b, true);
          }
        }
        if (needs[1]) {
          if (!transpose_b) {
            gb = MatMul(a, g, !transpose_a, false);
          } else {
            gb = MatMul(g, a, true, transpose_a);
          }
        }
        return {ga, gb};
      });
}

Var AddBias(const Var& x, const Var& bias) {
  if (bias.value().rank() != 1 || x.value().rank() < 1 ||
      x.shape().back() != bias.shape()[0]) {
    throw TensorError("bias " + ShapeToString(bias.shape()) +
                      " incompatible with " + ShapeToString(x.shape()));
  }
  const int64_t c = bias.shape()[0];
  Tensor out = x.value();
  double* o = out.data();
  const double* bv = bias.value().data();
  for (int64_t i = 0; i < out.size(); i += c) {
    for (int64_t j = 0; j < c; ++j) o[i + j] += bv[j];
  }
  return MakeResult("add_bias", std::move(out), {x, bias},
                    [x, bias](const Var& g, Needs needs) -> std::vector<Var> {
                      Var gx, gb;
                      if (needs[0]) gx = g;
                      if (needs[1]) gb = SumToLastDim(g);
                      return {gx, gb};
                    });
}

Var SumToLastDim(const Var& x) {
  if (x.value().rank() < 1) throw TensorError("SumToLastDim on a scalar");
  const int64_t c = x.shape().back();
  Tensor out({c});
  const double* in = x.value().data();
  double* o = out.data();
  for (int64_t i = 0; i < x.size(); i += c) {
    for (int64_t j = 0; j < c; ++j) o[j] += in[i + j];
  }
  const Shape shape = x.shape();
  return MakeResult("sum_to_last_dim", std::move(out), {x},
                    [shape](const Var& g, Needs) -> std::vector<Var> {
                      return {BroadcastLastDim(g, shape)};
                    });
}

Var BroadcastLastDim(const Var& bias, const Shape& shape) {
  if (bias.value().rank() != 1 || shape.empty() ||
      shape.back() != bias.shape()[0]) {
    throw TensorError("cannot broadcast " + ShapeToString(bias.shape()) +
                      " to " + ShapeToString(shape));
  }
  const int64_t c = bias.shape()[0];
  Tensor out(shape);
  double* o = out.data();
  const double* bv = bias.value().data();
  for (int64_t i = 0; i < out.size(); i += c) {
    for (int64_t j = 0; j < c; ++j) o[i + j] = bv[j];
  }
  return MakeResult("broadcast_last_dim", std::move(out), {bias},
                    [](const Var& g, Needs) -> std::vector<Var> {
                      return {SumToLastDim(g)};
                    });
}

Var Reshape(const Var& x, const Shape& shape) {
  const Shape original = x.shape();
  return MakeResult("reshape", x.value().Reshaped(shape), {x},
                    [original](const Var& g, Needs) -> std::vector<Var> {
                      return {Reshape(g, original)};
                    });
}

Var Sum(const Var& x, std::span<const int> axes) {
  const std::vector<int> ax = NormalizeAxes(axes, x.value().rank());
  Tensor out(ReducedShape(x.shape(), ax));
  const double* in = x.value().data();
  double* o = out.data();
  ForEachReduced(x.shape(), ax, [&](int64_t i, int64_t r) { o[r] += in[i]; });
  const Shape shape = x.shape();
  return MakeResult("sum", std::move(out), {x},
                    [shape, ax](const Var& g, Needs) -> std::vector<Var> {
                      return {BroadcastAlong(g, shape, ax)};
                    });
}

Var BroadcastAlong(const Var& x, const Shape& shape, std::span<const int> axes) {
  const std::vector<int> ax =
      NormalizeAxes(axes, static_cast<int>(shape.size()));
  if (ReducedShape(shape, ax) != x.shape()) {
    throw TensorError("cannot broadcast " + ShapeToString(x.shape()) + " to " +
                      ShapeToString(shape));
  }
  Tensor out(shape);
  const double* in = x.value().data();
  double* o = out.data();
  ForEachReduced(shape, ax, [&](int64_t i, int64_t r) { o[i] = in[r]; });
  return MakeResult("broadcast_along", std::move(out), {x},
                    [ax](const Var& g, Needs) -> std::vector<Var> {
                      return {Sum(g, ax)};
                    });
}

Var Mean(const Var& x, std::span<const int> axes) {
  const std::vector<int> ax = NormalizeAxes(axes, x.value().rank());
  int64_t count = 1;
  for (int a : ax) count *= x.shape()[a];
  return Scale(Sum(x, ax), count > 0 ? 1.0 / static_cast<double>(count) : 0.0);
}

Var Reduce(ReduceOp op, const Var& x, std::span<const int> axes) {
  return op == ReduceOp::kSum ? Sum(x, axes) : Mean(x, axes);
}

Var SumAll(const Var& x) {
  std::vector<int> axes(x.value().rank());
  for (int i = 0; i < x.value().rank(); ++i) axes[i] = i;
  return Sum(x, axes);
}

Var MeanAll(const Var& x) {
  return Scale(SumAll(x), x.size() > 0 ? 1.0 / static_cast<double>(x.size()) : 0.0);
}

Var SliceLastDim(const Var& x, int64_t begin, int64_t length) {
  if (x.value().rank() < 1 || begin < 0 || length < 0 ||
      begin + length > x.shape().back()) {
    throw TensorError("slice out of range for " + ShapeToString(x.shape()));
  }
  const int64_t total = x.shape().back();
  Shape shape = x.shape();
  shape.back() = length;
  Tensor out(shape);
  const double* in = x.value().data();
  double* o = out.data();
  const int64_t rows = total > 0 ? x.size() / total : 0;
  for (int64_t r = 0; r < rows; ++r) {
    std::copy(in + r * total + begin, in + r * total + begin + length,
              o + r * length);
  }
  return MakeResult("slice_last_dim", std::move(out), {x},
                    [begin, total](const Var& g, Needs) -> std::vector<Var> {
                      return {PadLastDim(g, begin, total)};
                    });
}

Var PadLastDim(const Var& x, int64_t begin, int64_t total) {
  if (x.value().rank() < 1 || begin < 0 ||
      begin + x.shape().back() > total) {
    throw TensorError("pad out of range for " + ShapeToString(x.shape()));
  }
  const int64_t length = x.shape().back();
  Shape shape = x.shape();
  shape.back() = total;
  Tensor out(shape);
  const double* in = x.value().data();
  double* o = out.data();
  const int64_t rows = length > 0 ? x.size() / length : 0;
  for (int64_t r = 0; r < rows; ++r) {
    std::copy(in + r * length, in + (r + 1) * length, o + r * total + begin);
  }
  return MakeResult("pad_last_dim", std::move(out), {x},
                    [begin, length](const Var& g, Needs) -> std::vector<Var> {
                      return {SliceLastDim(g, begin, length)};
                    });
}

Var Conv2D(const Var& x, const Var& kernel, int64_t stride, Padding padding) {
  if (x.value().rank() != 4 || kernel.value().rank() != 4) {
    throw TensorError("conv2d expects NHWC input and rank-4 kernel");
  }
  const ConvGeometry g =
      ConvGeometry::Make(x.shape()[1], x.shape()[2], kernel.shape()[0],
                         kernel.shape()[1], stride, padding);
  Tensor out = Conv2DForward(x.value(), kernel.value(), g);
  return MakeResult(
      "conv2d", std::move(out), {x, kernel},
      [x, kernel, g](const Var& grad, Needs needs) -> std::vector<Var> {
        Var gx, gk;
        if (needs[0]) {
          gx = Conv2DTranspose(grad, kernel, g.stride, g.padding, g.in_h, g.in_w);
        }
        if (needs[1]) {
          gk = Conv2DKernelGrad(x, grad, g.kernel_h, g.kernel_w, g.stride, g.padding);
        }
        return {gx, gk};
      });
}

Var Conv2DTranspose(const Var& y, const Var& kernel, int64_t stride,
                    Padding padding, int64_t out_h, int64_t out_w) {
  if (y.value().rank() != 4 || kernel.value().rank() != 4) {
    throw TensorError("conv2d_transpose expects NHWC input and rank-4 kernel");
  }
  const ConvGeometry g = ConvGeometry::Make(out_h, out_w, kernel.shape()[0],
                                            kernel.shape()[1], stride, padding);
  if (g.out_h != y.shape()[1] || g.out_w != y.shape()[2]) {
    throw TensorError("conv2d_transpose geometry mismatch: input " +
                      ShapeToString(y.shape()) + " cannot produce " +
                      std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  Tensor out = Conv2DTransposeForward(y.value(), kernel.value(), g);
  return MakeResult(
      "conv2d_transpose", std::move(out), {y, kernel},
      [y, kernel, g](const Var& grad, Needs needs) -> std::vector<Var> {
        Var gy, gk;
        if (needs[0]) gy = Conv2D(grad, kernel, g.stride, g.padding);
        if (needs[1]) {
          gk = Conv2DKernelGrad(grad, y, g.kernel_h, g.kernel_w, g.stride, g.padding);
        }
        return {gy, gk};
      });
}

Var Conv2DKernelGrad(const Var& x, const Var& y, int64_t kernel_h,
                     int64_t kernel_w, int64_t stride, Padding padding) {
  if (x.value().rank() != 4) throw TensorError("conv2d kernel-grad expects NHWC");
  const ConvGeometry g = ConvGeometry::Make(x.shape()[1], x.shape()[2],
                                            kernel_h, kernel_w, stride, padding);
  Tensor out = Conv2DKernelGradForward(x.value(), y.value(), g);
  return MakeResult(
      "conv2d_kernel_grad", std::move(out), {x, y},
      [x, y, g](const Var& h, Needs needs) -> std::vector<Var> {
        Var gx, gy;
        if (needs[0]) gx = Conv2DTranspose(y, h, g.stride, g.padding, g.in_h, g.in_w);
        if (needs[1]) gy = Conv2D(x, h, g.stride, g.padding);
        return {gx, gy};
      });
}

Var BceWithLogits(const Var& logits, const Tensor& targets) {
  if (logits.shape() != targets.shape()) {
    throw TensorError("bce targets " + ShapeToString(targets.shape()) +
                      " do not match logits " + ShapeToString(logits.shape()));
  }
  Tensor out(logits.shape());
  const double* l = logits.value().data();
  const double* t = targets.data();
  double* o = out.data();
  for (int64_t i = 0; i < out.size(); ++i) {
    o[i] = std::max(l[i], 0.0) - l[i] * t[i] + std::log1p(std::exp(-std::abs(l[i])));
  }
  return MakeResult(
      "bce_with_logits", std::move(out), {logits},
      [logits, t = std::make_shared<const Tensor>(targets)](const Var& g,
                                                            Needs) -> std::vector<Var> {
        Tensor d(logits.shape());
        const double* lv = logits.value().data();
        for (int64_t i = 0; i < d.size(); ++i) {
          const double p = lv[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-lv[i]))
                                         : std::exp(lv[i]) / (1.0 + std::exp(lv[i]));
          d[i] = p - (*t)[i];
        }
        return {Mul(g, Var::Constant(std::move(d)))};
      },
      /*second_order=*/false);
}

}  // namespace lvae
