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

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "lvae/tensor/kernels.h"

namespace lvae::kernels {
namespace {

Backend DetectDefault() {
  Backend best = BackendAvailable(Backend::kAvx2) ? Backend::kAvx2
                                                  : Backend::kScalar;
  if (const char* env = std::getenv("LVAE_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::kScalar;
    if (v == "avx2" && BackendAvailable(Backend::kAvx2)) return Backend::kAvx2;
  }
  return best;
}

std::atomic<Backend>& ActiveSlot() {
  static std::atomic<Backend> slot{DetectDefault()};
  return slot;
}

}  // namespace

std::string_view BackendName(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool BackendAvailable(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend ActiveBackend() { return ActiveSlot().load(std::memory_order_relaxed); }

void SetActiveBackend(Backend backend) {
  if (!BackendAvailable(backend)) backend = Backend::kScalar;
  ActiveSlot().store(backend, std::memory_order_relaxed);
}

void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Gemm(alpha, a, b, beta, c);
  scalar::Gemm(alpha, a, b, beta, c);
}

double Dot(std::span<const double> x, std::span<const double> y) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Dot(x, y);
  return scalar::Dot(x, y);
}

double SquaredDistance(std::span<const double> x, std::span<const double> y) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::SquaredDistance(x, y);
  return scalar::SquaredDistance(x, y);
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Axpy(alpha, x, y);
  scalar::Axpy(alpha, x, y);
}

void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Add(x, y, out);
  scalar::Add(x, y, out);
}

void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Mul(x, y, out);
  scalar::Mul(x, y, out);
}

void Relu(std::span<const double> x, std::span<double> out) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::Relu(x, out);
  scalar::Relu(x, out);
}

void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out) {
  if (ActiveBackend() == Backend::kAvx2) return avx2::ReluMask(x, g, out);
  scalar::ReluMask(x, g, out);
}

}  // namespace lvae::kernels
