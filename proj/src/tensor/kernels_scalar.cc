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

#include <algorithm>
#include <cstddef>

#include "lvae/tensor/kernels.h"

namespace lvae::kernels::scalar {
namespace {

inline double At(const ConstMatrix& m, int64_t i, int64_t j) {
  return m.transposed ? m.data[j * m.ld + i] : m.data[i * m.ld + j];
}

}  // namespace

void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c) {
  const int64_t m = c.rows;
  const int64_t n = c.cols;
  const int64_t k = a.cols;
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c.data + i * c.ld;
    if (beta == 0.0) {
      std::fill(crow, crow + n, 0.0);
    } else if (beta != 1.0) {
      for (int64_t j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (int64_t p = 0; p < k; ++p) {
      const double aip = alpha * At(a, i, p);
      if (aip == 0.0) continue;
      if (!b.transposed) {
        const double* brow = b.data + p * b.ld;
        for (int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      } else {
        for (int64_t j = 0; j < n; ++j) crow[j] += aip * b.data[j * b.ld + p];
      }
    }
  }
}

double Dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double SquaredDistance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
}

void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
}

void Relu(std::span<const double> x, std::span<double> out) {
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out) {
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? g[i] : 0.0;
}

}  // namespace lvae::kernels::scalar
