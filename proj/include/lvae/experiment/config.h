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

// Experiment configuration: a single JSON document validated against the
// built-in defaults. Every key must appear in the defaults, with the same
// JSON type (integers where the default is an integer), so misspelled or
// misplaced keys are rejected rather than ignored.

#ifndef LVAE_EXPERIMENT_CONFIG_H_
#define LVAE_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "lvae/mia/attack.h"
#include "lvae/nn/network.h"
#include "lvae/privacy/privacy_math.h"
#include "lvae/training/train.h"
#include "lvae/vae/model.h"

namespace lvae::experiment {

struct DatasetSettings {
  // "mnist" or "toy" (2-D Gaussian mixture with an MLP model).
  std::string kind = "mnist";
  // Directory with the MNIST IDX files; empty means $LVAE_DATA_DIR.
  std::string path;
  int64_t n_train = 9999;
  bool inject_outlier = true;
  double binarize_threshold = 0.5;
  int toy_components = 4;
  int64_t toy_hidden = 32;
};

struct AttackSettings {
  mia::Metric metric = mia::Metric::kEuclidean;
  int k = 1;
  int64_t n_synthetic = 10000;
  int64_t n_members = 1000;
  int64_t n_nonmembers = 1000;
  // Bernoulli models: emit 0/1 draws instead of pixel probabilities.
  bool sample_bits = false;
};

struct BudgetSettings {
  double R_x = 1.0;
  double delta_z = 0.01;
  double vol_A = 10.0;
  double vol_B = 1.0;
  double mc_confidence = 0.95;
  int64_t mc_samples = 100;
  double mc_sample_std = 1.0;
  privacy::BoundVariant bound = privacy::BoundVariant::kGeneral;
};

struct ExperimentConfig {
  uint64_t seed = 0;
  training::Variant variant = training::Variant::kVanilla;
  int64_t latent_dim = 8;
  double L = 1.0;
  nn::LipschitzMode mode = nn::LipschitzMode::kNone;
  double gp_lambda = 10.0;
  int64_t gp_points = 0;
  int64_t epochs = 10;
  int64_t batch_size = 64;
  double learning_rate = 1e-3;
  int64_t ratio_pairs = 1000;
  training::DpSgdConfig dp;
  DatasetSettings dataset;
  AttackSettings attack;
  BudgetSettings budget;
  int64_t generate_n = 16;
  int64_t index_code_samples = 2000;

  vae::Likelihood likelihood() const {
    return dataset.kind == "toy" ? vae::Likelihood::kGaussianUnitCov : vae::Likelihood::kBernoulli;
  }
};

// The defaults as a JSON document; doubles as the schema.
nlohmann::json DefaultConfigJson();

// Overlays `doc` on the defaults and converts. `lipschitz.mode` "auto"
// resolves to the variant's decoder mode; an explicit mode must match it.
absl::StatusOr<ExperimentConfig> ConfigFromJson(const nlohmann::json& doc);

// Fully resolved document (no "auto", dataset.path filled in).
nlohmann::json ConfigToJson(const ExperimentConfig& config);

// Applies "dotted.key=value" to `doc`. The value is read as JSON when it
// parses, and as a string otherwise.
absl::Status ApplyOverride(nlohmann::json& doc, std::string_view assignment);

// Reads `path` (if any), applies overrides in order, then `seed`.
absl::StatusOr<ExperimentConfig> ResolveConfig(const std::optional<std::string>& path,
                                               const std::vector<std::string>& overrides,
                                               std::optional<uint64_t> seed);

training::TrainConfig ToTrainConfig(const ExperimentConfig& config);

}  // namespace lvae::experiment

#endif  // LVAE_EXPERIMENT_CONFIG_H_
