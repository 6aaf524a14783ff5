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

#ifndef LVAE_TENSOR_KERNELS_H_
#define LVAE_TENSOR_KERNELS_H_

#include <cstdint>
#include <span>
#include <string_view>

// Dense numeric inner loops. Every kernel has a portable scalar reference
// implementation and, where the CPU supports it, an AVX2+FMA variant. The
// variant is chosen once per process (see ActiveBackend) so that results are
// bit-reproducible within a run and across runs on the same machine.
namespace lvae::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view BackendName(Backend backend);

// Returns true if `backend` can run on this CPU.
bool BackendAvailable(Backend backend);

// The backend used by the free functions below. Defaults to the fastest
// available one; the environment variable LVAE_KERNELS=scalar|avx2 overrides.
Backend ActiveBackend();

// Overrides the active backend. Intended for tests and benchmarks; not
// thread-safe with respect to concurrent kernel calls.
void SetActiveBackend(Backend backend);

// Row-major strided matrix view. When `transposed` is set, the logical matrix
// is the transpose of the stored one: logical (i, j) lives at data[j*ld + i].
struct ConstMatrix {
  const double* data;
  int64_t rows;  // logical rows
  int64_t cols;  // logical cols
  int64_t ld;    // stride between stored rows
  bool transposed = false;
};

struct MutableMatrix {
  double* data;
  int64_t rows;
  int64_t cols;
  int64_t ld;
};

// c = alpha * a * b + beta * c. When beta == 0, c is not read.
void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c);

double Dot(std::span<const double> x, std::span<const double> y);

// sum_i (x_i - y_i)^2. Exactly 0 when x == y.
double SquaredDistance(std::span<const double> x, std::span<const double> y);

// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);

// out = x + y, out = x * y (elementwise). `out` may alias x or y.
void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out);
void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out);

// out = max(x, 0)
void Relu(std::span<const double> x, std::span<double> out);

// out = g where x > 0, else 0.
void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out);

// Explicit per-backend entry points, used by the equivalence tests.
namespace scalar {
void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c);
double Dot(std::span<const double> x, std::span<const double> y);
double SquaredDistance(std::span<const double> x, std::span<const double> y);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out);
void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out);
void Relu(std::span<const double> x, std::span<double> out);
void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out);
}  // namespace scalar

namespace avx2 {
void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c);
double Dot(std::span<const double> x, std::span<const double> y);
double SquaredDistance(std::span<const double> x, std::span<const double> y);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out);
void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out);
void Relu(std::span<const double> x, std::span<double> out);
void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out);
}  // namespace avx2

}  // namespace lvae::kernels

#endif  // LVAE_TENSOR_KERNELS_H_
