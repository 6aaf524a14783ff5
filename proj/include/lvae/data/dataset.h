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

#ifndef LVAE_DATA_DATASET_H_
#define LVAE_DATA_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "lvae/tensor/tensor.h"

namespace lvae::data {

struct Provenance {
  std::string source;
  uint64_t seed = 0;
  // Transformations applied in order, e.g. "scale:1/255", "binarize:>=0.5".
  std::vector<std::string> transforms;
};

// Examples stacked along the first axis: [B, 28, 28, 1] for images and
// [B, 2] for the toy mixture. Image values lie in [0, 1].
struct Dataset {
  Tensor x;
  // Empty when unlabeled.
  std::vector<int> labels;
  // Row index of each example in the source it was drawn from; -1 for the
  // injected outlier.
  std::vector<int64_t> source_ids;
  // Row of the injected outlier, -1 if none.
  int64_t outlier_index = -1;
  Provenance provenance;

  int64_t size() const { return x.rank() == 0 ? 0 : x.dim(0); }
};

// Copies rows `ids` of `x` (any rank >= 1) into a new [ids.size(), ...]
// tensor.
Tensor GatherRows(const Tensor& x, const std::vector<int64_t>& ids);

// Reads `<prefix>-images-idx3-ubyte[.gz]` and `<prefix>-labels-idx1-ubyte[.gz]`
// from `dir` (prefix "train" or "t10k"), scaling pixels by 1/255.
absl::StatusOr<Dataset> LoadMnist(const std::string& dir, const std::string& prefix);

// Pixels >= threshold become 1, all others 0.
Dataset Binarize(const Dataset& images, double threshold = 0.5);

// n rows drawn uniformly without replacement, in draw order, followed by one
// all-ones image when inject_outlier is set.
absl::StatusOr<Dataset> BuildTrainingSet(const Dataset& full, int64_t n, bool inject_outlier,
                                         uint64_t seed);

struct MiaSplit {
  // Row indices into the training set.
  std::vector<int64_t> members;
  // Row indices into the test set.
  std::vector<int64_t> nonmembers;
};

absl::StatusOr<MiaSplit> MakeMiaSplit(const Dataset& train, const Dataset& test,
                                      int64_t n_members, int64_t n_nonmembers, uint64_t seed);

// n points from k isotropic Gaussians (std 0.5) whose means sit evenly on a
// circle of radius 4. The means are recorded row by row in `means`.
struct MixtureDataset {
  Dataset data;
  Tensor means;
};

absl::StatusOr<MixtureDataset> GaussianMixture2d(int64_t n, int k, uint64_t seed);

}  // namespace lvae::data

#endif  // LVAE_DATA_DATASET_H_
