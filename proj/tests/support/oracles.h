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

#ifndef LVAE_TESTS_SUPPORT_ORACLES_H_
#define LVAE_TESTS_SUPPORT_ORACLES_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lvae/tensor/conv.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tape.h"
#include "lvae/tensor/tensor.h"

// Reference computations that share no code with the library under test.
namespace lvae::testing {

// Naive i-j-p triple loop, row-major [m x k] * [k x n].
std::vector<double> TripleLoopMatMul(const std::vector<double>& a,
                                     const std::vector<double>& b, int64_t m,
                                     int64_t k, int64_t n);

// Cross-correlation of a single NHWC image written out as a dense matrix that
// maps the flattened input (h, w, cin) to the flattened output (oy, ox, cout).
// Padding is computed here from first principles.
Eigen::MatrixXd DenseConvMatrix(int64_t in_h, int64_t in_w, const Tensor& kernel,
                                int64_t stride, Padding padding);

// Largest singular value of `m` via a symmetric eigensolve of m^T m.
double SpectralNormOracle(const Eigen::MatrixXd& m);

// A scalar function of several tensors, built with differentiable ops.
using ScalarFn = std::function<Var(std::span<const Var>)>;

// Central differences of `f` with step h, one gradient per input.
std::vector<Tensor> FiniteDifferenceGrad(const ScalarFn& f,
                                         const std::vector<Tensor>& inputs,
                                         double h = 1e-5);

// Reverse-mode gradients of `f` with respect to each input.
std::vector<Tensor> TapeGrad(const ScalarFn& f, const std::vector<Tensor>& inputs);

// ||a - b|| / max(||a||, ||b||, tiny) over all entries of all tensors.
double RelativeError(const std::vector<Tensor>& a, const std::vector<Tensor>& b);

struct McDelta {
  double delta = 0.0;
  double se = 0.0;
};

// delta(eps) of `steps` composed Gaussian mechanisms (sensitivity 1, noise
// std sigma) estimated by simulating the privacy-loss random variable under
// the shifted distribution: delta = E[(1 - e^{eps - L})_+].
McDelta GaussianPrivacyLossDelta(int steps, double sigma, double eps, int64_t trials,
                                 RngStream& rng);

// The eps at which the simulated delta(eps) curve crosses `delta`, from one
// fixed set of simulated privacy losses.
double SimulatedEpsForDelta(int steps, double sigma, double delta, int64_t trials,
                            RngStream& rng);

}  // namespace lvae::testing

#endif  // LVAE_TESTS_SUPPORT_ORACLES_H_
