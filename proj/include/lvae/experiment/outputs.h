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

// File formats written and read by the experiment commands: CSV tables, PGM
// sample grids and SVG trade-off plots. Numbers are printed with a fixed
// format so identical inputs give identical bytes.

#ifndef LVAE_EXPERIMENT_OUTPUTS_H_
#define LVAE_EXPERIMENT_OUTPUTS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lvae/mia/attack.h"
#include "lvae/tensor/tensor.h"

namespace lvae::experiment {

absl::Status WriteFile(const std::string& path, std::string_view bytes);

// Header `sample_id,v0,...,v<D-1>`, one row per leading index of `x`, values
// with 9 significant digits.
std::string SamplesCsv(const Tensor& x);
// Rows as a [n, D] tensor.
absl::StatusOr<Tensor> ParseSamplesCsv(std::string_view text);

// Header `record_id,member,score`; member is 0 or 1, scores with 17
// significant digits.
std::string ScoresCsv(std::span<const mia::AttackRecord> records);
absl::StatusOr<std::vector<mia::AttackRecord>> ParseScoresCsv(std::string_view text);

// Header `alpha,beta,beta_envelope` on UniformGrid(points).
std::string CurveCsv(const mia::EmpiricalTradeoff& tradeoff, int points);

// Binary PGM (P5, maxval 255) tiling n images [n, h, w, 1] into a grid with
// ceil(sqrt(n)) columns. Values are clamped to [0, 1] and rounded; unused
// cells are black.
absl::StatusOr<std::string> PgmGrid(const Tensor& images);

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> alpha;
  std::vector<double> beta;
};

// Unit-square trade-off plot, alpha on the horizontal axis and beta on the
// vertical one, with one polyline per series and a legend.
std::string TradeoffSvg(const std::vector<SvgSeries>& series);

}  // namespace lvae::experiment

#endif  // LVAE_EXPERIMENT_OUTPUTS_H_
