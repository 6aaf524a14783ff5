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

// Distance-to-synthetic membership inference and empirical trade-off curves.
//
// Convention: a record is called a member when its score is strictly below
// the threshold. alpha is the fraction of nonmembers called members (false
// alarms) and beta the fraction of members not called members (missed
// detections).

#ifndef LVAE_MIA_ATTACK_H_
#define LVAE_MIA_ATTACK_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "lvae/privacy/privacy_math.h"
#include "lvae/tensor/tensor.h"

namespace lvae::mia {

enum class Metric { kEuclidean, kKnnMean };

std::string_view MetricName(Metric metric);
absl::StatusOr<Metric> ParseMetric(std::string_view name);

struct AttackConfig {
  Metric metric = Metric::kEuclidean;
  // Neighbours averaged by kKnnMean.
  int k = 1;
};

struct AttackRecord {
  int64_t id = 0;
  bool member = false;
  // Lower is more member-like; always >= 0.
  double score = 0.0;
};

// Per-target score against the synthetic set: the smallest l2 distance
// (kEuclidean) or the mean of the k smallest (kKnnMean). Rows are flattened.
absl::StatusOr<std::vector<double>> NearestDistances(const Tensor& targets,
                                                     const Tensor& synthetic,
                                                     const AttackConfig& config);

// Scores `targets` and labels row r with ids[r] and member[r].
absl::StatusOr<std::vector<AttackRecord>> McAttackScores(const Tensor& targets,
                                                         std::span<const int64_t> ids,
                                                         const std::vector<bool>& member,
                                                         const Tensor& synthetic,
                                                         const AttackConfig& config);

struct EmpiricalTradeoff {
  // One entry per distinct score, then +inf.
  std::vector<double> thresholds;
  // alpha non-decreasing, beta non-increasing; starts at (0, 1), ends at
  // (1, 0).
  std::vector<double> alpha;
  std::vector<double> beta;
  // Vertices of the lower convex envelope (randomized threshold tests).
  std::vector<double> envelope_alpha;
  std::vector<double> envelope_beta;
  int64_t n_members = 0;
  int64_t n_nonmembers = 0;

  // inf{beta_j : alpha_j <= alpha}.
  double BetaAt(double alpha) const;
  double EnvelopeAt(double alpha) const;
  // Both evaluated on UniformGrid(points).
  privacy::TradeoffCurve StaircaseCurve(int points) const;
  privacy::TradeoffCurve EnvelopeCurve(int points) const;
};

absl::StatusOr<EmpiricalTradeoff> ComputeTradeoff(std::span<const AttackRecord> records);

// 1 - (area under beta(alpha)), trapezoidal over the threshold points. Equals
// the probability that a random member scores below a random nonmember, with
// ties counted as one half.
double AttackAuc(const EmpiricalTradeoff& tradeoff);

// Standard error of the AUC under the null hypothesis of identical score
// distributions.
double NullAucSe(int64_t n_members, int64_t n_nonmembers);

struct BoundViolation {
  // min over grid of empirical beta - analytic beta.
  double worst_margin = 0.0;
  double worst_alpha = 0.0;
  // Binomial standard error at the worst point.
  double worst_se = 0.0;
  // Smallest margin / SE over the grid (points with SE = 0 use the margin
  // sign only).
  double worst_z = 0.0;
  std::vector<double> margins;
  std::vector<double> ses;
};

// Compares `empirical` against `analytic` on the analytic grid, interpolating
// the empirical curve when the grids differ. The SE at alpha combines the
// binomial error of beta (n_members, at the larger of the analytic and
// observed variances) with that of alpha (n_nonmembers)
// propagated through the local slope of the analytic curve.
absl::StatusOr<BoundViolation> ComputeBoundViolation(const privacy::TradeoffCurve& empirical,
                                                     const privacy::TradeoffCurve& analytic,
                                                     int64_t n_members, int64_t n_nonmembers);

}  // namespace lvae::mia

#endif  // LVAE_MIA_ATTACK_H_
