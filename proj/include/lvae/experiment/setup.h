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

// Assembly of the model and datasets an experiment config describes.

#ifndef LVAE_EXPERIMENT_SETUP_H_
#define LVAE_EXPERIMENT_SETUP_H_

#include "absl/status/statusor.h"
#include "lvae/data/dataset.h"
#include "lvae/experiment/config.h"
#include "lvae/vae/model.h"

namespace lvae::experiment {

// Freshly initialised model from RngStream(seed, "init"): the convolutional
// MNIST model, or a two-hidden-layer MLP for the toy data.
absl::StatusOr<vae::VaeModel> BuildModel(const ExperimentConfig& config);

// MNIST: the train split binarized at dataset.binarize_threshold, then
// n_train rows drawn with the seed plus the optional all-white outlier. Toy:
// n_train mixture draws with the seed (no outlier).
absl::StatusOr<data::Dataset> LoadTrainingSet(const ExperimentConfig& config);

// Source of nonmembers: the binarized MNIST test split, or an independent
// mixture sample of attack.n_nonmembers rows.
absl::StatusOr<data::Dataset> LoadNonmemberPool(const ExperimentConfig& config);

}  // namespace lvae::experiment

#endif  // LVAE_EXPERIMENT_SETUP_H_
