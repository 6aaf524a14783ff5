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

// The four training variants: vanilla and gradient-penalty/spectral-norm
// Lipschitz VAEs trained with Adam on shuffled minibatches, and a DP-SGD
// baseline trained with noisy SGD on Poisson-sampled batches.
//
// All randomness derives from RngStream(seed, "train") forked per epoch and
// per step, so an epoch's draws depend only on (seed, epoch index) and
// resuming from a checkpoint reproduces an uninterrupted run bit for bit.

#ifndef LVAE_TRAINING_TRAIN_H_
#define LVAE_TRAINING_TRAIN_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lvae/nn/network.h"
#include "lvae/tensor/tensor.h"
#include "lvae/training/dp_sgd.h"
#include "lvae/training/optimizer.h"
#include "lvae/vae/model.h"

namespace lvae::training {

enum class Variant { kVanilla, kDpSgd, kLvaeGp, kLvaeSn };

// "vanilla", "dpsgd", "lvae-gp", "lvae-sn".
std::string_view VariantName(Variant variant);
absl::StatusOr<Variant> ParseVariant(std::string_view name);

// Decoder mode the variant trains: kNone for vanilla and dpsgd.
nn::LipschitzMode DecoderModeFor(Variant variant);

struct TrainConfig {
  Variant variant = Variant::kVanilla;
  int64_t epochs = 10;
  // Minibatch size of the Adam variants; the last batch of an epoch may be
  // smaller.
  int64_t batch_size = 64;
  AdamConfig adam;
  // lvae-gp only.
  double gp_lambda = 10.0;
  int64_t gp_points = 0;
  // dpsgd only. One epoch is round(1 / sampling_rate) steps.
  DpSgdConfig dp;
  // Latent pairs for the end-of-epoch decoder Lipschitz spot check; 0 skips
  // it.
  int64_t ratio_pairs = 1000;
};

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

struct EpochRecord {
  // 1-based.
  int64_t epoch = 0;
  // Optimizer steps taken since the start of training.
  int64_t steps = 0;
  // Means of the per-step losses (per example for dpsgd).
  double recon = 0.0;
  double kl = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  double lipschitz_ratio = kNotMeasured;
  // Accountant epsilon at dp.delta after this epoch; dpsgd only.
  double eps_spent = kNotMeasured;
  double wall_seconds = 0.0;
};

// One record per completed epoch.
struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

// Header `epoch,steps,recon,kl,penalty,total,lipschitz_ratio,eps_spent`,
// values printed with 17 significant digits ("nan" when not measured). Wall
// time is excluded so identical runs give identical bytes.
std::string HistoryCsv(const TrainHistory& history);
// Header `epoch,wall_seconds`.
std::string WallTimeCsv(const TrainHistory& history);

class Trainer {
 public:
  // Checks that `config` suits the variant and the model; `model` must
  // outlive the trainer.
  static absl::StatusOr<Trainer> Create(vae::VaeModel* model, const TrainConfig& config,
                                        uint64_t seed, int64_t dataset_size);

  // Runs the next epoch on `x` ([dataset_size, data_shape...]).
  absl::StatusOr<EpochRecord> RunEpoch(const Tensor& x);

  const TrainConfig& config() const { return config_; }
  uint64_t seed() const { return seed_; }
  const TrainHistory& history() const { return history_; }
  int64_t epochs_done() const { return static_cast<int64_t>(history_.epochs.size()); }
  int64_t total_steps() const { return total_steps_; }
  const AdamState& adam_state() const { return adam_; }

  // Continues from a saved position: optimizer state, history so far and
  // the step count.
  absl::Status Restore(AdamState adam, TrainHistory history, int64_t total_steps);

 private:
  Trainer(vae::VaeModel* model, const TrainConfig& config, uint64_t seed, int64_t dataset_size);

  void AdamEpoch(const Tensor& x, RngStream& epoch_rng, EpochRecord& record);
  absl::Status DpSgdEpoch(const Tensor& x, RngStream& epoch_rng, EpochRecord& record);
  std::vector<Tensor*> Parameters();

  vae::VaeModel* model_;
  TrainConfig config_;
  uint64_t seed_;
  int64_t dataset_size_;
  AdamState adam_;
  TrainHistory history_;
  int64_t total_steps_ = 0;
};

using EpochCallback = std::function<void(const EpochRecord&, const vae::VaeModel&)>;

// Runs config.epochs epochs, calling `on_epoch` after each.
absl::StatusOr<TrainHistory> Train(vae::VaeModel& model, const Tensor& x,
                                   const TrainConfig& config, uint64_t seed,
                                   const EpochCallback& on_epoch = {});

}  // namespace lvae::training

#endif  // LVAE_TRAINING_TRAIN_H_
