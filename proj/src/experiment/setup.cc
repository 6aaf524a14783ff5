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

#include "lvae/experiment/setup.h"

#include "absl/strings/str_cat.h"

namespace lvae::experiment {
namespace {

// Keeps the toy nonmember sample independent of every training sample.
constexpr uint64_t kToyTestSeedMask = 0x9e3779b97f4a7c15ULL;

}  // namespace

absl::StatusOr<vae::VaeModel> BuildModel(const ExperimentConfig& config) {
  RngStream init(config.seed, "init");
  const nn::LipschitzDecoderConfig lipschitz{config.L, config.mode};
  try {
    if (config.dataset.kind == "toy") {
      return vae::MakeMlpVae(2, config.dataset.toy_hidden, config.latent_dim,
                             config.likelihood(), lipschitz, init);
    }
    return vae::MakeMnistVae(config.latent_dim, config.likelihood(), lipschitz, init);
  } catch (const TensorError& e) {
    return absl::InvalidArgumentError(absl::StrCat("cannot build model: ", e.what()));
  }
}

absl::StatusOr<data::Dataset> LoadTrainingSet(const ExperimentConfig& config) {
  const DatasetSettings& ds = config.dataset;
  if (ds.kind == "toy") {
    absl::StatusOr<data::MixtureDataset> mix =
        data::GaussianMixture2d(ds.n_train, ds.toy_components, config.seed);
    if (!mix.ok()) return mix.status();
    return std::move(mix->data);
  }
  if (ds.path.empty()) {
    return absl::FailedPreconditionError("dataset.path is empty and LVAE_DATA_DIR is not set");
  }
  absl::StatusOr<data::Dataset> full = data::LoadMnist(ds.path, "train");
  if (!full.ok()) return full.status();
  return data::BuildTrainingSet(data::Binarize(*full, ds.binarize_threshold), ds.n_train,
                                ds.inject_outlier, config.seed);
}

absl::StatusOr<data::Dataset> LoadNonmemberPool(const ExperimentConfig& config) {
  const DatasetSettings& ds = config.dataset;
  if (ds.kind == "toy") {
    absl::StatusOr<data::MixtureDataset> mix = data::GaussianMixture2d(
        config.attack.n_nonmembers, ds.toy_components, config.seed ^ kToyTestSeedMask);
    if (!mix.ok()) return mix.status();
    return std::move(mix->data);
  }
  if (ds.path.empty()) {
    return absl::FailedPreconditionError("dataset.path is empty and LVAE_DATA_DIR is not set");
  }
  absl::StatusOr<data::Dataset> test = data::LoadMnist(ds.path, "t10k");
  if (!test.ok()) return test.status();
  return data::Binarize(*test, ds.binarize_threshold);
}

}  // namespace lvae::experiment
