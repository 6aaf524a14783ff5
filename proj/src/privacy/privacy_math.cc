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

#include "lvae/privacy/privacy_math.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "lvae/privacy/special_functions.h"

namespace lvae::privacy {
namespace {

bool InUnit(double v) { return v >= 0 && v <= 1; }

bool NonNegative(double v) { return v >= 0 && std::isfinite(v); }

absl::Status CheckEpsDelta(double eps, double delta) {
  if (!NonNegative(eps)) {
    return absl::InvalidArgumentError(absl::StrCat("eps must be >= 0, got ", eps));
  }
  if (!InUnit(delta)) {
    return absl::InvalidArgumentError(absl::StrCat("delta must lie in [0, 1], got ", delta));
  }
  return absl::OkStatus();
}

absl::Status CheckAlpha(double alpha) {
  if (!InUnit(alpha)) {
    return absl::InvalidArgumentError(absl::StrCat("alpha must lie in [0, 1], got ", alpha));
  }
  return absl::OkStatus();
}

// Phi^{-1}(1 - alpha), evaluated without forming 1 - alpha for small alpha.
double UpperQuantile(double alpha) {
  return alpha < 0.5 ? -StdNormalQuantile(alpha) : StdNormalQuantile(1 - alpha);
}

// delta(eps) for mu > 0. The second term is formed in log space so that a
// large eps cannot overflow e^eps against an underflowed tail.
double GdpDelta(double mu, double eps) {
  const double first = StdNormalCdf(-eps / mu + mu / 2);
  const double tail = StdNormalCdf(-eps / mu - mu / 2);
  const double second = tail > 0 ? std::exp(eps + std::log(tail)) : 0.0;
  return std::max(0.0, first - second);
}

}  // namespace

std::string_view CurveSourceName(CurveSource source) {
  switch (source) {
    case CurveSource::kFEpsDelta:
      return "f_eps_delta";
    case CurveSource::kGdp:
      return "gdp";
    case CurveSource::kEmpirical:
      return "empirical";
  }
  return "unknown";
}

absl::Status TradeoffCurve::Validate() const {
  if (alpha.size() != beta.size() || alpha.empty()) {
    return absl::InvalidArgumentError("trade-off curve needs equally long, non-empty grids");
  }
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (!InUnit(alpha[i]) || !InUnit(beta[i])) {
      return absl::InvalidArgumentError(absl::StrCat("curve point ", i, " leaves [0, 1]^2"));
    }
    if (i > 0 && !(alpha[i] > alpha[i - 1])) {
      return absl::InvalidArgumentError("alpha grid must be strictly increasing");
    }
    if (i > 0 && beta[i] > beta[i - 1]) {
      return absl::InvalidArgumentError(absl::StrCat("beta increases at point ", i));
    }
  }
  return absl::OkStatus();
}

double TradeoffCurve::At(double a) const {
  if (a <= alpha.front()) return beta.front();
  if (a >= alpha.back()) return beta.back();
  const auto it = std::upper_bound(alpha.begin(), alpha.end(), a);
  const size_t hi = it - alpha.begin();
  const size_t lo = hi - 1;
  const double t = (a - alpha[lo]) / (alpha[hi] - alpha[lo]);
  return beta[lo] + t * (beta[hi] - beta[lo]);
}

std::vector<double> UniformGrid(int n) {
  std::vector<double> grid(std::max(n, 2));
  const int last = static_cast<int>(grid.size()) - 1;
  for (int i = 0; i <= last; ++i) grid[i] = static_cast<double>(i) / last;
  return grid;
}

absl::StatusOr<double> FEpsDelta(double eps, double delta, double alpha) {
  if (absl::Status s = CheckEpsDelta(eps, delta); !s.ok()) return s;
  if (absl::Status s = CheckAlpha(alpha); !s.ok()) return s;
  const double e = std::exp(eps);
  return std::max({0.0, 1 - delta - e * alpha, (1 - delta - alpha) / e});
}

absl::StatusOr<TradeoffCurve> FEpsDeltaCurve(double eps, double delta, int points) {
  if (absl::Status s = CheckEpsDelta(eps, delta); !s.ok()) return s;
  TradeoffCurve curve;
  curve.source = CurveSource::kFEpsDelta;
  curve.alpha = UniformGrid(points);
  for (double a : curve.alpha) curve.beta.push_back(*FEpsDelta(eps, delta, a));
  return curve;
}

absl::StatusOr<KairouzResult> KairouzCheck(double eps, double delta, const TradeoffCurve& curve,
                                           double tolerance) {
  if (absl::Status s = CheckEpsDelta(eps, delta); !s.ok()) return s;
  if (absl::Status s = curve.Validate(); !s.ok()) return s;
  const double e = std::exp(eps);
  KairouzResult result;
  result.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < curve.alpha.size(); ++i) {
    const double p_fa = curve.alpha[i], p_md = curve.beta[i];
    const double margin =
        std::min(p_fa + e * p_md - (1 - delta), e * p_fa + p_md - (1 - delta));
    if (margin < result.worst_margin) {
      result.worst_margin = margin;
      result.worst_alpha = p_fa;
    }
  }
  result.pass = result.worst_margin >= -tolerance;
  return result;
}

absl::StatusOr<double> GdpTradeoff(double mu, double alpha) {
  if (!NonNegative(mu)) {
    return absl::InvalidArgumentError(absl::StrCat("mu must be >= 0, got ", mu));
  }
  if (absl::Status s = CheckAlpha(alpha); !s.ok()) return s;
  return StdNormalCdf(UpperQuantile(alpha) - mu);
}

absl::StatusOr<TradeoffCurve> GdpCurve(double mu, int points) {
  TradeoffCurve curve;
  curve.source = CurveSource::kGdp;
  curve.alpha = UniformGrid(points);
  for (double a : curve.alpha) {
    absl::StatusOr<double> b = GdpTradeoff(mu, a);
    if (!b.ok()) return b.status();
    curve.beta.push_back(*b);
  }
  return curve;
}

absl::StatusOr<double> GdpToEpsDelta(double mu, double eps) {
  if (!NonNegative(mu)) {
    return absl::InvalidArgumentError(absl::StrCat("mu must be >= 0, got ", mu));
  }
  if (!NonNegative(eps)) {
    return absl::InvalidArgumentError(absl::StrCat("eps must be >= 0, got ", eps));
  }
  if (mu == 0) return 0.0;
  return GdpDelta(mu, eps);
}

absl::StatusOr<double> GdpEpsForDelta(double mu, double delta) {
  if (!NonNegative(mu)) {
    return absl::InvalidArgumentError(absl::StrCat("mu must be >= 0, got ", mu));
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError(absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  if (mu == 0 || GdpDelta(mu, 0.0) <= delta) return 0.0;
  constexpr double kMaxEps = 1e4;
  double lo = 0.0, hi = 1.0;
  while (GdpDelta(mu, hi) > delta) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxEps) {
      return absl::OutOfRangeError(
          absl::StrCat("no finite eps reaches delta=", delta, " at mu=", mu));
    }
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (GdpDelta(mu, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

absl::StatusOr<double> RZ(double delta_z, int d) {
  if (!(delta_z > 0 && delta_z < 1)) {
    return absl::InvalidArgumentError(absl::StrCat("delta_z must lie in (0, 1), got ", delta_z));
  }
  if (d < 1) return absl::InvalidArgumentError(absl::StrCat("latent dim must be >= 1, got ", d));
  double lo = 0.0, hi = 1.0;
  while (ChiTail(hi, d) > delta_z) {
    lo = hi;
    hi *= 2;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ChiTail(mid, d) > delta_z ? lo : hi) = mid;
  }
  return hi;
}

absl::StatusOr<double> BoundC(double r_x, double L, double r_z, BoundVariant variant) {
  if (!NonNegative(r_x) || !NonNegative(L) || !NonNegative(r_z)) {
    return absl::InvalidArgumentError(
        absl::StrCat("R_x, L and R_z must be finite and >= 0, got ", r_x, ", ", L, ", ", r_z));
  }
  switch (variant) {
    case BoundVariant::kGeneral:
      return r_x * r_x + 2 * L * r_z * r_x;
    case BoundVariant::kOnManifold:
      return 4 * L * L * r_z * r_z;
  }
  return absl::InvalidArgumentError("unknown bound variant");
}

absl::StatusOr<double> EncoderEps(double C) {
  if (!NonNegative(C)) return absl::InvalidArgumentError(absl::StrCat("C must be >= 0, got ", C));
  return 2 * C;
}

absl::StatusOr<double> WeightVariationBound(double eps, double vol_b) {
  if (!NonNegative(eps) || !NonNegative(vol_b)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eps and |B| must be finite and >= 0, got ", eps, ", ", vol_b));
  }
  return 2 * std::sqrt(eps) * vol_b;
}

absl::StatusOr<DeltaBarBreakdown> DeltaBar(double delta_z, double delta_x, double delta_x_tilde,
                                           double eps, double vol_b, double vol_a) {
  if (!NonNegative(delta_z) || !NonNegative(delta_x) || !NonNegative(delta_x_tilde)) {
    return absl::InvalidArgumentError("delta components must be finite and >= 0");
  }
  if (!(vol_a > 0) || !std::isfinite(vol_a)) {
    return absl::InvalidArgumentError(absl::StrCat("|A| must be > 0, got ", vol_a));
  }
  absl::StatusOr<double> weight = WeightVariationBound(eps, vol_b);
  if (!weight.ok()) return weight.status();
  DeltaBarBreakdown out;
  out.delta_z = delta_z;
  out.delta_x = delta_x;
  out.delta_x_tilde = delta_x_tilde;
  out.weight_term = *weight / vol_a;
  out.delta_bar = delta_z + delta_x + delta_x_tilde + out.weight_term;
  return out;
}

absl::StatusOr<double> McErrorTerm(int64_t n, double sample_std, double confidence) {
  if (n <= 0) return absl::InvalidArgumentError(absl::StrCat("N must be >= 1, got ", n));
  if (!NonNegative(sample_std)) {
    return absl::InvalidArgumentError(absl::StrCat("sample std must be >= 0, got ", sample_std));
  }
  if (!(confidence > 0 && confidence < 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("confidence must lie in (0, 1), got ", confidence));
  }
  const double z = StdNormalQuantile(0.5 + 0.5 * confidence);
  return z * sample_std / std::sqrt(static_cast<double>(n));
}

absl::StatusOr<double> DpsgdMu(double p, double sigma, int64_t steps) {
  if (!(p > 0 && p <= 1)) {
    return absl::InvalidArgumentError(absl::StrCat("sampling rate must lie in (0, 1], got ", p));
  }
  if (!(sigma > 0)) {
    return absl::InvalidArgumentError(absl::StrCat("noise multiplier must be > 0, got ", sigma));
  }
  if (steps < 0) return absl::InvalidArgumentError("steps must be >= 0");
  const double t = static_cast<double>(steps);
  const double mu = p == 1 ? std::sqrt(t) / sigma
                           : p * std::sqrt(t * std::expm1(1 / (sigma * sigma)));
  if (!std::isfinite(mu)) {
    return absl::OutOfRangeError(absl::StrCat("mu overflows at sigma=", sigma));
  }
  return mu;
}

absl::StatusOr<double> DpsgdBudget(double p, double sigma, int64_t steps, double delta) {
  absl::StatusOr<double> mu = DpsgdMu(p, sigma, steps);
  if (!mu.ok()) return mu.status();
  return GdpEpsForDelta(*mu, delta);
}

double Box::Volume() const {
  double v = 1.0;
  for (size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

absl::StatusOr<Estimate> EmpiricalWeightVariation(const GaussianEncodings& first,
                                                  const GaussianEncodings& second,
                                                  const Box& region, int64_t n_mc,
                                                  RngStream& rng) {
  const Shape& shape = first.mu.shape();
  if (shape.size() != 2 || first.logvar.shape() != shape || second.mu.shape() != shape ||
      second.logvar.shape() != shape) {
    return absl::InvalidArgumentError("both encodings must be [N, d] with matching shapes");
  }
  const int64_t n = shape[0], d = shape[1];
  if (n == 0) return absl::InvalidArgumentError("no data points");
  if (static_cast<int64_t>(region.lo.size()) != d || static_cast<int64_t>(region.hi.size()) != d) {
    return absl::InvalidArgumentError("region dimension differs from latent dimension");
  }
  for (int64_t j = 0; j < d; ++j) {
    if (!(region.hi[j] > region.lo[j])) return absl::InvalidArgumentError("empty region");
  }
  if (n_mc < 2) return absl::InvalidArgumentError("need at least two Monte Carlo draws");

  const double log_norm = -0.5 * d * std::log(2 * std::numbers::pi);
  auto density = [&](const GaussianEncodings& enc, int64_t i, const std::vector<double>& z) {
    double log_q = log_norm;
    for (int64_t j = 0; j < d; ++j) {
      const double lv = enc.logvar[i * d + j];
      const double r = z[j] - enc.mu[i * d + j];
      log_q -= 0.5 * (lv + r * r * std::exp(-lv));
    }
    return std::exp(log_q);
  };

  const double volume = region.Volume();
  std::vector<double> z(d);
  double sum = 0.0, sum_sq = 0.0;
  for (int64_t s = 0; s < n_mc; ++s) {
    for (int64_t j = 0; j < d; ++j) {
      z[j] = region.lo[j] + (region.hi[j] - region.lo[j]) * rng.NextUniform();
    }
    double diff = 0.0;
    for (int64_t i = 0; i < n; ++i) diff += density(first, i, z) - density(second, i, z);
    const double f = volume * diff / n;
    sum += f;
    sum_sq += f * f;
  }
  const double mean = sum / n_mc;
  const double var = std::max(0.0, (sum_sq - n_mc * mean * mean) / (n_mc - 1));
  return Estimate{mean, std::sqrt(var / n_mc)};
}

}  // namespace lvae::privacy
