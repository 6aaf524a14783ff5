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

// Closed-form privacy mathematics: trade-off functions, Gaussian DP, the
// decoder-Lipschitz bound pipeline and the DP-SGD accountant. All functions
// are pure.

#ifndef LVAE_PRIVACY_PRIVACY_MATH_H_
#define LVAE_PRIVACY_PRIVACY_MATH_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "lvae/tensor/rng.h"
#include "lvae/tensor/tensor.h"

namespace lvae::privacy {

enum class CurveSource { kFEpsDelta, kGdp, kEmpirical };

std::string_view CurveSourceName(CurveSource source);

// beta(alpha) sampled on an increasing alpha grid.
struct TradeoffCurve {
  std::vector<double> alpha;
  std::vector<double> beta;
  CurveSource source = CurveSource::kEmpirical;

  // OK when the grids have equal length, alpha is increasing inside [0, 1]
  // and beta is non-increasing inside [0, 1].
  absl::Status Validate() const;
  // Piecewise-linear interpolation; alpha outside the grid is clamped.
  double At(double alpha) const;
};

// n >= 2 equally spaced points from 0 to 1 inclusive.
std::vector<double> UniformGrid(int n);

// f_{eps,delta}(alpha) = max{0, 1 - delta - e^eps alpha,
//                            e^-eps (1 - delta - alpha)}.
absl::StatusOr<double> FEpsDelta(double eps, double delta, double alpha);
absl::StatusOr<TradeoffCurve> FEpsDeltaCurve(double eps, double delta, int points);

struct KairouzResult {
  bool pass = false;
  // Smallest slack over both inequalities and all grid points.
  double worst_margin = 0.0;
  double worst_alpha = 0.0;
};

// Reads every curve point as (P_FA, P_MD) = (alpha, beta) and checks
// P_FA + e^eps P_MD >= 1 - delta and e^eps P_FA + P_MD >= 1 - delta.
// `tolerance` is the most negative margin still counted as a pass.
absl::StatusOr<KairouzResult> KairouzCheck(double eps, double delta, const TradeoffCurve& curve,
                                           double tolerance = 1e-12);

// G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu).
absl::StatusOr<double> GdpTradeoff(double mu, double alpha);
absl::StatusOr<TradeoffCurve> GdpCurve(double mu, int points);

// delta(eps) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2); 0 at mu = 0.
absl::StatusOr<double> GdpToEpsDelta(double mu, double eps);
// Smallest eps >= 0 with delta(eps) <= delta, by bisection to 1e-12.
absl::StatusOr<double> GdpEpsForDelta(double mu, double delta);

// Smallest radius with P(||Z|| > R) <= delta_z for Z ~ N(0, I_d), found by
// bisection on the chi tail. The returned radius errs on the covering side.
absl::StatusOr<double> RZ(double delta_z, int d);

enum class BoundVariant { kGeneral, kOnManifold };

// kGeneral: R_x^2 + 2 L R_z R_x. kOnManifold: 4 L^2 R_z^2.
absl::StatusOr<double> BoundC(double r_x, double L, double r_z,
                              BoundVariant variant = BoundVariant::kGeneral);

// Posterior sampling with log-likelihood bounded by C is 2C-DP.
absl::StatusOr<double> EncoderEps(double C);

// 2 sqrt(eps) |B|.
absl::StatusOr<double> WeightVariationBound(double eps, double vol_b);

struct DeltaBarBreakdown {
  double delta_z = 0.0;
  double delta_x = 0.0;
  double delta_x_tilde = 0.0;
  // 2 sqrt(eps) |B| / |A|.
  double weight_term = 0.0;
  // Sum of the four components.
  double delta_bar = 0.0;
};

absl::StatusOr<DeltaBarBreakdown> DeltaBar(double delta_z, double delta_x, double delta_x_tilde,
                                           double eps, double vol_b, double vol_a);

// z * sample_std / sqrt(N) with z the two-sided Gaussian quantile of
// `confidence` (1.959964 at 0.95).
absl::StatusOr<double> McErrorTerm(int64_t n, double sample_std, double confidence);

// Gaussian DP parameter of `steps` subsampled Gaussian mechanisms: exactly
// sqrt(steps) / sigma at p = 1, and the central-limit approximation
// p sqrt(steps (e^{1/sigma^2} - 1)) otherwise.
absl::StatusOr<double> DpsgdMu(double p, double sigma, int64_t steps);
// eps at `delta` for DpsgdMu(p, sigma, steps).
absl::StatusOr<double> DpsgdBudget(double p, double sigma, int64_t steps, double delta);

// Axis-aligned box [lo, hi] in latent space.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  double Volume() const;
};

// Diagonal Gaussian posteriors q(z | x_i) = N(mu_i, diag(exp(logvar_i))),
// one row per data point.
struct GaussianEncodings {
  Tensor mu;
  Tensor logvar;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo estimate of the integral over `region` of
// (1/N) sum_i [q_1(z | x_i) - q_2(z | x_i)] using uniform draws in the box.
absl::StatusOr<Estimate> EmpiricalWeightVariation(const GaussianEncodings& first,
                                                  const GaussianEncodings& second,
                                                  const Box& region, int64_t n_mc,
                                                  RngStream& rng);

}  // namespace lvae::privacy

#endif  // LVAE_PRIVACY_PRIVACY_MATH_H_
