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

// AVX2+FMA kernels. The translation unit is compiled for the baseline ISA;
// only the functions tagged LVAE_AVX2 use the extended instruction set, so no
// AVX2 code leaks into inline functions shared with other translation units.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "lvae/tensor/kernels.h"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define LVAE_HAVE_X86 1
#define LVAE_AVX2 __attribute__((target("avx2,fma")))
#else
#define LVAE_HAVE_X86 0
#define LVAE_AVX2
#endif

namespace lvae::kernels::avx2 {

#if LVAE_HAVE_X86

namespace {

constexpr int64_t kMr = 6;
constexpr int64_t kNr = 8;
constexpr int64_t kMc = 120;
constexpr int64_t kKc = 256;
constexpr int64_t kNc = 3072;

inline double At(const ConstMatrix& m, int64_t i, int64_t j) {
  return m.transposed ? m.data[j * m.ld + i] : m.data[i * m.ld + j];
}

// Packs rows [i0, i0+mc) x cols [p0, p0+kc) of `a` into kMr-row slivers,
// each stored column-major (kMr values per k), zero-padded.
void PackA(const ConstMatrix& a, int64_t i0, int64_t mc, int64_t p0,
           int64_t kc, double* out) {
  for (int64_t is = 0; is < mc; is += kMr) {
    const int64_t rows = std::min(kMr, mc - is);
    if (!a.transposed) {
      for (int64_t p = 0; p < kc; ++p) {
        int64_t r = 0;
        for (; r < rows; ++r) out[p * kMr + r] = a.data[(i0 + is + r) * a.ld + p0 + p];
        for (; r < kMr; ++r) out[p * kMr + r] = 0.0;
      }
    } else {
      for (int64_t p = 0; p < kc; ++p) {
        const double* src = a.data + (p0 + p) * a.ld + i0 + is;
        int64_t r = 0;
        for (; r < rows; ++r) out[p * kMr + r] = src[r];
        for (; r < kMr; ++r) out[p * kMr + r] = 0.0;
      }
    }
    out += kc * kMr;
  }
}

// Packs rows [p0, p0+kc) x cols [j0, j0+nc) of `b` into kNr-column slivers,
// each stored row-major (kNr values per k), zero-padded.
void PackB(const ConstMatrix& b, int64_t p0, int64_t kc, int64_t j0,
           int64_t nc, double* out) {
  for (int64_t js = 0; js < nc; js += kNr) {
    const int64_t cols = std::min(kNr, nc - js);
    if (!b.transposed) {
      for (int64_t p = 0; p < kc; ++p) {
        const double* src = b.data + (p0 + p) * b.ld + j0 + js;
        int64_t c = 0;
        for (; c < cols; ++c) out[p * kNr + c] = src[c];
        for (; c < kNr; ++c) out[p * kNr + c] = 0.0;
      }
    } else {
      for (int64_t p = 0; p < kc; ++p) {
        int64_t c = 0;
        for (; c < cols; ++c) out[p * kNr + c] = At(b, p0 + p, j0 + js + c);
        for (; c < kNr; ++c) out[p * kNr + c] = 0.0;
      }
    }
    out += kc * kNr;
  }
}

// 6x8 register tile: acc = sum_p a[:, p] * b[p, :]; then
// c = alpha * acc + beta * c on the valid (rows x cols) corner.
LVAE_AVX2 void MicroKernel(int64_t kc, const double* ap, const double* bp,
                           double alpha, double beta, double* c, int64_t ldc,
                           int64_t rows, int64_t cols) {
  __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
  __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
  __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
  __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
  __m256d c40 = _mm256_setzero_pd(), c41 = _mm256_setzero_pd();
  __m256d c50 = _mm256_setzero_pd(), c51 = _mm256_setzero_pd();
  for (int64_t p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_loadu_pd(bp);
    const __m256d b1 = _mm256_loadu_pd(bp + 4);
    __m256d a = _mm256_broadcast_sd(ap + 0);
    c00 = _mm256_fmadd_pd(a, b0, c00);
    c01 = _mm256_fmadd_pd(a, b1, c01);
    a = _mm256_broadcast_sd(ap + 1);
    c10 = _mm256_fmadd_pd(a, b0, c10);
    c11 = _mm256_fmadd_pd(a, b1, c11);
    a = _mm256_broadcast_sd(ap + 2);
    c20 = _mm256_fmadd_pd(a, b0, c20);
    c21 = _mm256_fmadd_pd(a, b1, c21);
    a = _mm256_broadcast_sd(ap + 3);
    c30 = _mm256_fmadd_pd(a, b0, c30);
    c31 = _mm256_fmadd_pd(a, b1, c31);
    a = _mm256_broadcast_sd(ap + 4);
    c40 = _mm256_fmadd_pd(a, b0, c40);
    c41 = _mm256_fmadd_pd(a, b1, c41);
    a = _mm256_broadcast_sd(ap + 5);
    c50 = _mm256_fmadd_pd(a, b0, c50);
    c51 = _mm256_fmadd_pd(a, b1, c51);
    ap += kMr;
    bp += kNr;
  }
  alignas(32) double tile[kMr * kNr];
  _mm256_store_pd(tile + 0, c00);
  _mm256_store_pd(tile + 4, c01);
  _mm256_store_pd(tile + 8, c10);
  _mm256_store_pd(tile + 12, c11);
  _mm256_store_pd(tile + 16, c20);
  _mm256_store_pd(tile + 20, c21);
  _mm256_store_pd(tile + 24, c30);
  _mm256_store_pd(tile + 28, c31);
  _mm256_store_pd(tile + 32, c40);
  _mm256_store_pd(tile + 36, c41);
  _mm256_store_pd(tile + 40, c50);
  _mm256_store_pd(tile + 44, c51);

  if (rows == kMr && cols == kNr) {
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    for (int64_t r = 0; r < kMr; ++r) {
      double* crow = c + r * ldc;
      __m256d t0 = _mm256_mul_pd(va, _mm256_load_pd(tile + r * kNr));
      __m256d t1 = _mm256_mul_pd(va, _mm256_load_pd(tile + r * kNr + 4));
      if (beta != 0.0) {
        t0 = _mm256_fmadd_pd(vb, _mm256_loadu_pd(crow), t0);
        t1 = _mm256_fmadd_pd(vb, _mm256_loadu_pd(crow + 4), t1);
      }
      _mm256_storeu_pd(crow, t0);
      _mm256_storeu_pd(crow + 4, t1);
    }
    return;
  }
  for (int64_t r = 0; r < rows; ++r) {
    double* crow = c + r * ldc;
    for (int64_t j = 0; j < cols; ++j) {
      const double v = alpha * tile[r * kNr + j];
      crow[j] = beta == 0.0 ? v : v + beta * crow[j];
    }
  }
}

std::vector<double>& PackBufferA() {
  thread_local std::vector<double> buffer;
  return buffer;
}

std::vector<double>& PackBufferB() {
  thread_local std::vector<double> buffer;
  return buffer;
}

void ScaleRows(double beta, const MutableMatrix& c) {
  for (int64_t i = 0; i < c.rows; ++i) {
    double* row = c.data + i * c.ld;
    if (beta == 0.0) {
      std::fill(row, row + c.cols, 0.0);
    } else {
      for (int64_t j = 0; j < c.cols; ++j) row[j] *= beta;
    }
  }
}

}  // namespace

void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c) {
  const int64_t m = c.rows;
  const int64_t n = c.cols;
  const int64_t k = a.cols;
  if (m == 0 || n == 0) return;
  if (k == 0 || alpha == 0.0) {
    if (beta != 1.0) ScaleRows(beta, c);
    return;
  }
  std::vector<double>& abuf = PackBufferA();
  std::vector<double>& bbuf = PackBufferB();
  const int64_t mc_max = std::min(kMc, (m + kMr - 1) / kMr * kMr);
  const int64_t nc_max = std::min(kNc, (n + kNr - 1) / kNr * kNr);
  const int64_t kc_max = std::min(kKc, k);
  if (static_cast<int64_t>(abuf.size()) < mc_max * kc_max + kMr * kc_max)
    abuf.resize(mc_max * kc_max + kMr * kc_max);
  if (static_cast<int64_t>(bbuf.size()) < nc_max * kc_max + kNr * kc_max)
    bbuf.resize(nc_max * kc_max + kNr * kc_max);

  for (int64_t jc = 0; jc < n; jc += kNc) {
    const int64_t nc = std::min(kNc, n - jc);
    for (int64_t pc = 0; pc < k; pc += kKc) {
      const int64_t kc = std::min(kKc, k - pc);
      const double beta_block = pc == 0 ? beta : 1.0;
      PackB(b, pc, kc, jc, nc, bbuf.data());
      for (int64_t ic = 0; ic < m; ic += kMc) {
        const int64_t mc = std::min(kMc, m - ic);
        PackA(a, ic, mc, pc, kc, abuf.data());
        for (int64_t jr = 0; jr < nc; jr += kNr) {
          const int64_t cols = std::min(kNr, nc - jr);
          const double* bp = bbuf.data() + (jr / kNr) * kc * kNr;
          for (int64_t ir = 0; ir < mc; ir += kMr) {
            const int64_t rows = std::min(kMr, mc - ir);
            const double* ap = abuf.data() + (ir / kMr) * kc * kMr;
            MicroKernel(kc, ap, bp, alpha, beta_block,
                        c.data + (ic + ir) * c.ld + jc + jr, c.ld, rows, cols);
          }
        }
      }
    }
  }
}

LVAE_AVX2 double Dot(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]),
                           _mm256_loadu_pd(&y[i + 4]), acc1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

LVAE_AVX2 double SquaredDistance(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

LVAE_AVX2 void Axpy(double alpha, std::span<const double> x,
                    std::span<double> y) {
  const size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]),
                                            _mm256_loadu_pd(&y[i])));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

LVAE_AVX2 void Add(std::span<const double> x, std::span<const double> y,
                   std::span<double> out) {
  const size_t n = x.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&out[i], _mm256_add_pd(_mm256_loadu_pd(&x[i]),
                                            _mm256_loadu_pd(&y[i])));
  }
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

LVAE_AVX2 void Mul(std::span<const double> x, std::span<const double> y,
                   std::span<double> out) {
  const size_t n = x.size();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(_mm256_loadu_pd(&x[i]),
                                            _mm256_loadu_pd(&y[i])));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

LVAE_AVX2 void Relu(std::span<const double> x, std::span<double> out) {
  const size_t n = x.size();
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(&x[i]);
    const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(&out[i], _mm256_and_pd(v, mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

LVAE_AVX2 void ReluMask(std::span<const double> x, std::span<const double> g,
                        std::span<double> out) {
  const size_t n = x.size();
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask =
        _mm256_cmp_pd(_mm256_loadu_pd(&x[i]), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(&out[i], _mm256_and_pd(_mm256_loadu_pd(&g[i]), mask));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? g[i] : 0.0;
}

#else  // !LVAE_HAVE_X86

// Non-x86 builds never select this backend; forward to the reference code so
// the symbols exist for the equivalence tests.
void Gemm(double alpha, const ConstMatrix& a, const ConstMatrix& b,
          double beta, const MutableMatrix& c) {
  scalar::Gemm(alpha, a, b, beta, c);
}
double Dot(std::span<const double> x, std::span<const double> y) {
  return scalar::Dot(x, y);
}
double SquaredDistance(std::span<const double> x, std::span<const double> y) {
  return scalar::SquaredDistance(x, y);
}
void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  scalar::Axpy(alpha, x, y);
}
void Add(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  scalar::Add(x, y, out);
}
void Mul(std::span<const double> x, std::span<const double> y,
         std::span<double> out) {
  scalar::Mul(x, y, out);
}
void Relu(std::span<const double> x, std::span<double> out) {
  scalar::Relu(x, out);
}
void ReluMask(std::span<const double> x, std::span<const double> g,
              std::span<double> out) {
  scalar::ReluMask(x, g, out);
}

#endif

}  // namespace lvae::kernels::avx2
