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

#ifndef LVAE_PRIVACY_SPECIAL_FUNCTIONS_H_
#define LVAE_PRIVACY_SPECIAL_FUNCTIONS_H_

namespace lvae::privacy {

// Phi(x), accurate in both tails.
double StdNormalCdf(double x);

// Phi^{-1}(p). Returns -inf at p = 0 and +inf at p = 1; NaN outside [0, 1].
// Relative accuracy is close to machine precision across (0, 1).
double StdNormalQuantile(double p);

// Regularized lower and upper incomplete gamma functions P(a, x) and
// Q(a, x) = 1 - P(a, x), for a > 0 and x >= 0. The series is used below
// x = a + 1 and the continued fraction above it, so the upper tail keeps full
// relative accuracy for large x.
double RegularizedGammaP(double a, double x);
double RegularizedGammaQ(double a, double x);

// P(||Z|| > r) for Z ~ N(0, I_d).
double ChiTail(double r, int d);

}  // namespace lvae::privacy

#endif  // LVAE_PRIVACY_SPECIAL_FUNCTIONS_H_
