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

#include "lvae/tensor/conv.h"

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "lvae/tensor/kernels.h"

namespace lvae {
namespace {

// Upper bound on the im2col scratch buffer, in doubles.
constexpr int64_t kMaxColumnElements = int64_t{1} << 22;

struct Dims {
  int64_t batch, in_c, out_c, patch, rows_per_example;
};

void CheckKernel(const Tensor& kernel, const ConvGeometry& g) {
  if (kernel.rank() != 4 || kernel.dim(0) != g.kernel_h ||
      kernel.dim(1) != g.kernel_w) {
    throw TensorError("kernel shape " + ShapeToString(kernel.shape()) +
                      " does not match geometry");
  }
}

int64_t ChunkSize(const Dims& d) {
  const int64_t per_example = std::max<int64_t>(1, d.rows_per_example * d.patch);
  return std::clamp<int64_t>(kMaxColumnElements / per_example, 1,
                             std::max<int64_t>(1, d.batch));
}

// Gathers the receptive fields of examples [b0, b0 + nb) into rows of `cols`.
void Im2Col(const double* x, const ConvGeometry& g, int64_t in_c, int64_t b0,
            int64_t nb, double* cols) {
  const int64_t patch = g.kernel_h * g.kernel_w * in_c;
  for (int64_t b = b0; b < b0 + nb; ++b) {
    const double* image = x + b * g.in_h * g.in_w * in_c;
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        double* row = cols;
        for (int64_t ky = 0; ky < g.kernel_h; ++ky) {
          const int64_t iy = oy * g.stride - g.pad_top + ky;
          for (int64_t kx = 0; kx < g.kernel_w; ++kx) {
            const int64_t ix = ox * g.stride - g.pad_left + kx;
            if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) {
              std::memset(row, 0, sizeof(double) * in_c);
            } else {
              std::memcpy(row, image + (iy * g.in_w + ix) * in_c,
                          sizeof(double) * in_c);
            }
            row += in_c;
          }
        }
        cols += patch;
      }
    }
  }
}

// Scatter-adds rows of `cols` back onto the images [b0, b0 + nb) of `x`.
void Col2Im(const double* cols, const ConvGeometry& g, int64_t in_c,
            int64_t b0, int64_t nb, double* x) {
  const int64_t patch = g.kernel_h * g.kernel_w * in_c;
  for (int64_t b = b0; b < b0 + nb; ++b) {
    double* image = x + b * g.in_h * g.in_w * in_c;
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        const double* row = cols;
        for (int64_t ky = 0; ky < g.kernel_h; ++ky) {
          const int64_t iy = oy * g.stride - g.pad_top + ky;
          for (int64_t kx = 0; kx < g.kernel_w; ++kx) {
            const int64_t ix = ox * g.stride - g.pad_left + kx;
            if (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w) {
              double* dst = image + (iy * g.in_w + ix) * in_c;
              for (int64_t c = 0; c < in_c; ++c) dst[c] += row[c];
            }
            row += in_c;
          }
        }
        cols += patch;
      }
    }
  }
}

}  // namespace

ConvGeometry ConvGeometry::Make(int64_t in_h, int64_t in_w, int64_t kernel_h,
                                int64_t kernel_w, int64_t stride,
                                Padding padding) {
  if (stride < 1) {
    throw TensorError("convolution stride must be >= 1, got " +
                      std::to_string(stride));
  }
  if (kernel_h < 1 || kernel_w < 1 || in_h < 1 || in_w < 1) {
    throw TensorError("convolution extents must be positive");
  }
  ConvGeometry g;
  g.in_h = in_h;
  g.in_w = in_w;
  g.kernel_h = kernel_h;
  g.kernel_w = kernel_w;
  g.stride = stride;
  g.padding = padding;
  if (padding == Padding::kSame) {
    g.out_h = (in_h + stride - 1) / stride;
    g.out_w = (in_w + stride - 1) / stride;
    const int64_t pad_h = std::max<int64_t>((g.out_h - 1) * stride + kernel_h - in_h, 0);
    const int64_t pad_w = std::max<int64_t>((g.out_w - 1) * stride + kernel_w - in_w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    if (kernel_h > in_h || kernel_w > in_w) {
      throw TensorError("kernel does not fit the valid-padded input");
    }
    g.out_h = (in_h - kernel_h) / stride + 1;
    g.out_w = (in_w - kernel_w) / stride + 1;
  }
  return g;
}

int64_t TransposedExtent(int64_t in, int64_t kernel, int64_t stride,
                         Padding padding) {
  return padding == Padding::kSame ? in * stride : (in - 1) * stride + kernel;
}

Tensor Conv2DForward(const Tensor& x, const Tensor& kernel,
                     const ConvGeometry& g) {
  CheckKernel(kernel, g);
  if (x.rank() != 4 || x.dim(1) != g.in_h || x.dim(2) != g.in_w ||
      x.dim(3) != kernel.dim(2)) {
    throw TensorError("conv2d input " + ShapeToString(x.shape()) +
                      " incompatible with kernel " +
                      ShapeToString(kernel.shape()));
  }
  const Dims d{x.dim(0), kernel.dim(2), kernel.dim(3),
               g.kernel_h * g.kernel_w * kernel.dim(2), g.out_h * g.out_w};
  Tensor out({d.batch, g.out_h, g.out_w, d.out_c});
  const int64_t chunk = ChunkSize(d);
  std::vector<double> cols(chunk * d.rows_per_example * d.patch);
  for (int64_t b0 = 0; b0 < d.batch; b0 += chunk) {
    const int64_t nb = std::min(chunk, d.batch - b0);
    const int64_t m = nb * d.rows_per_example;
    Im2Col(x.data(), g, d.in_c, b0, nb, cols.data());
    kernels::Gemm(1.0, {cols.data(), m, d.patch, d.patch},
                  {kernel.data(), d.patch, d.out_c, d.out_c}, 0.0,
                  {out.data() + b0 * d.rows_per_example * d.out_c, m, d.out_c,
                   d.out_c});
  }
  return out;
}

Tensor Conv2DTransposeForward(const Tensor& y, const Tensor& kernel,
                              const ConvGeometry& g) {
  CheckKernel(kernel, g);
  if (y.rank() != 4 || y.dim(1) != g.out_h || y.dim(2) != g.out_w ||
      y.dim(3) != kernel.dim(3)) {
    throw TensorError("conv2d_transpose input " + ShapeToString(y.shape()) +
                      " incompatible with kernel " +
                      ShapeToString(kernel.shape()) + " and geometry");
  }
  const Dims d{y.dim(0), kernel.dim(2), kernel.dim(3),
               g.kernel_h * g.kernel_w * kernel.dim(2), g.out_h * g.out_w};
  Tensor x({d.batch, g.in_h, g.in_w, d.in_c});
  const int64_t chunk = ChunkSize(d);
  std::vector<double> cols(chunk * d.rows_per_example * d.patch);
  for (int64_t b0 = 0; b0 < d.batch; b0 += chunk) {
    const int64_t nb = std::min(chunk, d.batch - b0);
    const int64_t m = nb * d.rows_per_example;
    kernels::Gemm(1.0,
                  {y.data() + b0 * d.rows_per_example * d.out_c, m, d.out_c,
                   d.out_c},
                  {kernel.data(), d.out_c, d.patch, d.out_c, true}, 0.0,
                  {cols.data(), m, d.patch, d.patch});
    Col2Im(cols.data(), g, d.in_c, b0, nb, x.data());
  }
  return x;
}

Tensor Conv2DKernelGradForward(const Tensor& x, const Tensor& y,
                               const ConvGeometry& g) {
  if (x.rank() != 4 || y.rank() != 4 || x.dim(0) != y.dim(0) ||
      x.dim(1) != g.in_h || x.dim(2) != g.in_w || y.dim(1) != g.out_h ||
      y.dim(2) != g.out_w) {
    throw TensorError("conv2d kernel-gradient operands " +
                      ShapeToString(x.shape()) + ", " +
                      ShapeToString(y.shape()) + " do not match geometry");
  }
  const Dims d{x.dim(0), x.dim(3), y.dim(3), g.kernel_h * g.kernel_w * x.dim(3),
               g.out_h * g.out_w};
  Tensor kernel({g.kernel_h, g.kernel_w, d.in_c, d.out_c});
  const int64_t chunk = ChunkSize(d);
  std::vector<double> cols(chunk * d.rows_per_example * d.patch);
  for (int64_t b0 = 0; b0 < d.batch; b0 += chunk) {
    const int64_t nb = std::min(chunk, d.batch - b0);
    const int64_t m = nb * d.rows_per_example;
    Im2Col(x.data(), g, d.in_c, b0, nb, cols.data());
    kernels::Gemm(1.0, {cols.data(), d.patch, m, d.patch, true},
                  {y.data() + b0 * d.rows_per_example * d.out_c, m, d.out_c,
                   d.out_c},
                  b0 == 0 ? 0.0 : 1.0, {kernel.data(), d.patch, d.out_c, d.out_c});
  }
  return kernel;
}

}  // namespace lvae
