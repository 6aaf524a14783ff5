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

// Binary checkpoint: everything needed to reproduce a model and to resume its
// training bit for bit.
//
// Layout (all integers and floats little-endian):
//   "LVAE"  u32 version
//   u64 n   metadata JSON (n bytes)
//   u64 n   resolved experiment config JSON (n bytes)
//   u64 count, then per blob:
//     u32 n name (n bytes)  u32 rank  rank x u64 dims  prod(dims) x f64
// Blobs hold the encoder and decoder parameters ("encoder.<i>.weight", ...),
// the decoder's power-iteration vectors ("decoder.<i>.u") and the Adam
// moments ("adam.m.<parameter>", "adam.v.<parameter>").

#ifndef LVAE_EXPERIMENT_CHECKPOINT_H_
#define LVAE_EXPERIMENT_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lvae/experiment/config.h"
#include "lvae/training/optimizer.h"
#include "lvae/training/train.h"
#include "lvae/vae/model.h"

namespace lvae::experiment {

inline constexpr uint32_t kCheckpointVersion = 1;

struct RngState {
  std::string name;
  uint64_t seed = 0;
  std::string label;
  uint64_t counter = 0;
};

struct Checkpoint {
  ExperimentConfig config;
  vae::VaeModel model;
  training::AdamState adam;
  // Wall times are not stored.
  training::TrainHistory history;
  int64_t total_steps = 0;
  std::vector<RngState> rng_states;
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
// Errors: kDataLoss for a bad magic or truncated/garbled content,
// kFailedPrecondition for an unsupported format version, kInvalidArgument
// when the blobs do not fit the architecture the config describes.
absl::StatusOr<Checkpoint> ParseCheckpoint(std::string_view bytes);

absl::Status SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path);

}  // namespace lvae::experiment

#endif  // LVAE_EXPERIMENT_CHECKPOINT_H_
