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

#include "lvae/mia/attack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "absl/strings/str_cat.h"
#include "lvae/tensor/kernels.h"

namespace lvae::mia {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int64_t RowSize(const Tensor& t) {
  return t.rank() == 0 || t.dim(0) == 0 ? 0 : t.size() / t.dim(0);
}

// Linear interpolation through vertices with increasing x.
double Interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const size_t hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
  const size_t lo = hi - 1;
  if (xs[hi] == xs[lo]) return std::min(ys[lo], ys[hi]);
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

// Cross product of (a - o) and (b - o).
double Cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

std::string_view MetricName(Metric metric) {
  return metric == Metric::kEuclidean ? "euclidean" : "knn_mean";
}

absl::StatusOr<Metric> ParseMetric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "knn_mean") return Metric::kKnnMean;
  return absl::InvalidArgumentError(absl::StrCat("unknown attack metric '", std::string(name),
                                                 "' (expected euclidean or knn_mean)"));
}

absl::StatusOr<std::vector<double>> NearestDistances(const Tensor& targets,
                                                     const Tensor& synthetic,
                                                     const AttackConfig& config) {
  if (synthetic.rank() == 0 || synthetic.dim(0) == 0) {
    return absl::InvalidArgumentError("empty synthetic set");
  }
  if (targets.rank() == 0) return absl::InvalidArgumentError("targets need a leading batch axis");
  const int64_t dim = RowSize(synthetic);
  const int64_t n_targets = targets.dim(0), n_synth = synthetic.dim(0);
  if (n_targets > 0 && RowSize(targets) != dim) {
    return absl::InvalidArgumentError(absl::StrCat("target rows have ", RowSize(targets),
                                                   " values, synthetic rows have ", dim));
  }
  const int k = config.metric == Metric::kEuclidean ? 1 : config.k;
  if (k < 1 || k > n_synth) {
    return absl::InvalidArgumentError(
        absl::StrCat("k=", k, " must lie in [1, ", n_synth, "]"));
  }
  std::vector<double> scores(n_targets);
  std::vector<double> d2(n_synth);
  for (int64_t t = 0; t < n_targets; ++t) {
    const std::span<const double> row(targets.data() + t * dim, dim);
    for (int64_t s = 0; s < n_synth; ++s) {
      d2[s] = kernels::SquaredDistance(row, {synthetic.data() + s * dim, static_cast<size_t>(dim)});
    }
    std::partial_sort(d2.begin(), d2.begin() + k, d2.end());
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::sqrt(d2[j]);
    scores[t] = sum / k;
  }
  return scores;
}

absl::StatusOr<std::vector<AttackRecord>> McAttackScores(const Tensor& targets,
                                                         std::span<const int64_t> ids,
                                                         const std::vector<bool>& member,
                                                         const Tensor& synthetic,
                                                         const AttackConfig& config) {
  const int64_t n = targets.rank() == 0 ? 0 : targets.dim(0);
  if (static_cast<int64_t>(ids.size()) != n || static_cast<int64_t>(member.size()) != n) {
    return absl::InvalidArgumentError("ids and labels must have one entry per target");
  }
  absl::StatusOr<std::vector<double>> scores = NearestDistances(targets, synthetic, config);
  if (!scores.ok()) return scores.status();
  std::vector<AttackRecord> out(n);
  for (int64_t i = 0; i < n; ++i) out[i] = {ids[i], member[i], (*scores)[i]};
  return out;
}

absl::StatusOr<EmpiricalTradeoff> ComputeTradeoff(std::span<const AttackRecord> records) {
  EmpiricalTradeoff out;
  for (const AttackRecord& r : records) {
    if (!(r.score >= 0)) return absl::InvalidArgumentError("scores must be >= 0");
    ++(r.member ? out.n_members : out.n_nonmembers);
  }
  if (out.n_members == 0 || out.n_nonmembers == 0) {
    return absl::InvalidArgumentError("both members and nonmembers are required");
  }
  std::vector<size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return records[a].score < records[b].score; });

  // Sweep thresholds upward; below[*] counts records strictly under the
  // current threshold.
  int64_t members_below = 0, nonmembers_below = 0;
  auto emit = [&](double threshold) {
    out.thresholds.push_back(threshold);
    out.alpha.push_back(static_cast<double>(nonmembers_below) / out.n_nonmembers);
    out.beta.push_back(static_cast<double>(out.n_members - members_below) / out.n_members);
  };
  for (size_t i = 0; i < order.size();) {
    const double v = records[order[i]].score;
    emit(v);
    for (; i < order.size() && records[order[i]].score == v; ++i) {
      ++(records[order[i]].member ? members_below : nonmembers_below);
    }
  }
  emit(kInf);

  // Lower convex hull by the monotone chain; points are already sorted by
  // alpha with beta non-increasing inside ties.
  for (size_t i = 0; i < out.alpha.size(); ++i) {
    const double x = out.alpha[i], y = out.beta[i];
    while (out.envelope_alpha.size() >= 2) {
      const size_t m = out.envelope_alpha.size();
      if (Cross(out.envelope_alpha[m - 2], out.envelope_beta[m - 2], out.envelope_alpha[m - 1],
                out.envelope_beta[m - 1], x, y) > 0) {
        break;
      }
      out.envelope_alpha.pop_back();
      out.envelope_beta.pop_back();
    }
    if (!out.envelope_alpha.empty() && out.envelope_alpha.back() == x) {
      out.envelope_beta.back() = std::min(out.envelope_beta.back(), y);
      continue;
    }
    out.envelope_alpha.push_back(x);
    out.envelope_beta.push_back(y);
  }
  return out;
}

double EmpiricalTradeoff::BetaAt(double a) const {
  // alpha is non-decreasing, so the last point with alpha_j <= a carries the
  // smallest admissible beta.
  const size_t idx = std::upper_bound(alpha.begin(), alpha.end(), a) - alpha.begin();
  return idx == 0 ? 1.0 : beta[idx - 1];
}

double EmpiricalTradeoff::EnvelopeAt(double a) const {
  return Interpolate(envelope_alpha, envelope_beta, a);
}

privacy::TradeoffCurve EmpiricalTradeoff::StaircaseCurve(int points) const {
  privacy::TradeoffCurve curve{privacy::UniformGrid(points), {}, privacy::CurveSource::kEmpirical};
  for (double a : curve.alpha) curve.beta.push_back(BetaAt(a));
  return curve;
}

privacy::TradeoffCurve EmpiricalTradeoff::EnvelopeCurve(int points) const {
  privacy::TradeoffCurve curve{privacy::UniformGrid(points), {}, privacy::CurveSource::kEmpirical};
  for (double a : curve.alpha) curve.beta.push_back(EnvelopeAt(a));
  return curve;
}

double AttackAuc(const EmpiricalTradeoff& tradeoff) {
  double area = 0.0;
  for (size_t i = 1; i < tradeoff.alpha.size(); ++i) {
    area += (tradeoff.alpha[i] - tradeoff.alpha[i - 1]) *
            (tradeoff.beta[i] + tradeoff.beta[i - 1]) / 2;
  }
  return 1.0 - area;
}

double NullAucSe(int64_t n_members, int64_t n_nonmembers) {
  const double n1 = static_cast<double>(n_members), n2 = static_cast<double>(n_nonmembers);
  return std::sqrt((n1 + n2 + 1) / (12 * n1 * n2));
}

absl::StatusOr<BoundViolation> ComputeBoundViolation(const privacy::TradeoffCurve& empirical,
                                                     const privacy::TradeoffCurve& analytic,
                                                     int64_t n_members, int64_t n_nonmembers) {
  if (absl::Status s = empirical.Validate(); !s.ok()) return s;
  if (absl::Status s = analytic.Validate(); !s.ok()) return s;
  if (n_members < 1 || n_nonmembers < 1) {
    return absl::InvalidArgumentError("sample sizes must be positive");
  }
  BoundViolation out;
  out.worst_margin = kInf;
  out.worst_z = kInf;
  const std::vector<double>& grid = analytic.alpha;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double a = grid[i];
    const double b = analytic.beta[i];
    const double e = empirical.At(a);
    const double margin = e - b;
    // Slope of the analytic curve from the neighbouring grid points.
    const size_t lo = i == 0 ? 0 : i - 1, hi = std::min(i + 1, grid.size() - 1);
    const double slope =
        hi > lo ? (analytic.beta[hi] - analytic.beta[lo]) / (grid[hi] - grid[lo]) : 0.0;
    // The larger of the analytic and observed binomial variances keeps the
    // endpoints, where the analytic beta is 0 or 1, from reporting SE = 0.
    const double se = std::sqrt(std::max(b * (1 - b), e * (1 - e)) / n_members +
                                slope * slope * a * (1 - a) / n_nonmembers);
    const double z = se > 0 ? margin / se : (margin < 0 ? -kInf : 0.0);
    out.margins.push_back(margin);
    out.ses.push_back(se);
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_alpha = a;
      out.worst_se = se;
    }
    out.worst_z = std::min(out.worst_z, z);
  }
  return out;
}

}  // namespace lvae::mia
