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

#include "lvae/data/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "lvae/data/idx.h"
#include "lvae/tensor/rng.h"

namespace lvae::data {
namespace {

constexpr double kMixtureRadius = 4.0;
constexpr double kMixtureStd = 0.5;

absl::StatusOr<IdxArray> ReadIdx(const std::string& dir, const std::string& stem,
                                 uint32_t magic) {
  for (const char* suffix : {".gz", ""}) {
    const std::string path = (std::filesystem::path(dir) / (stem + suffix)).string();
    if (!std::filesystem::exists(path)) continue;
    absl::StatusOr<std::string> bytes = ReadFileBytes(path);
    if (!bytes.ok()) return bytes.status();
    absl::StatusOr<IdxArray> parsed = ParseIdx(*bytes, magic);
    if (!parsed.ok()) {
      return absl::Status(parsed.status().code(),
                          absl::StrCat(path, ": ", parsed.status().message()));
    }
    return parsed;
  }
  return absl::NotFoundError(absl::StrCat("no ", stem, "[.gz] in ", dir));
}

// The first k indices of a Fisher-Yates shuffle of 0..n-1.
std::vector<int64_t> SampleWithoutReplacement(int64_t n, int64_t k, RngStream& rng) {
  std::vector<int64_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int64_t i = 0; i < k; ++i) {
    const int64_t j = i + static_cast<int64_t>(rng.NextBelow(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

Tensor GatherRows(const Tensor& x, const std::vector<int64_t>& ids) {
  Shape shape = x.shape();
  const int64_t row = shape[0] == 0 ? 0 : x.size() / shape[0];
  shape[0] = static_cast<int64_t>(ids.size());
  Tensor out(shape);
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= x.dim(0)) throw TensorError("GatherRows: index out of range");
    std::copy_n(x.data() + ids[r] * row, row, out.data() + r * row);
  }
  return out;
}

absl::StatusOr<Dataset> LoadMnist(const std::string& dir, const std::string& prefix) {
  absl::StatusOr<IdxArray> images = ReadIdx(dir, prefix + "-images-idx3-ubyte", kIdxImagesMagic);
  if (!images.ok()) return images.status();
  absl::StatusOr<IdxArray> labels = ReadIdx(dir, prefix + "-labels-idx1-ubyte", kIdxLabelsMagic);
  if (!labels.ok()) return labels.status();
  const std::vector<int64_t>& d = images->dims;
  if (d.size() != 3 || labels->dims.size() != 1 || labels->dims[0] != d[0]) {
    return absl::InvalidArgumentError("MNIST images and labels disagree on the example count");
  }
  Dataset out;
  out.x = Tensor({d[0], d[1], d[2], 1});
  for (size_t i = 0; i < images->values.size(); ++i) out.x[i] = images->values[i] / 255.0;
  out.labels.assign(labels->values.begin(), labels->values.end());
  out.source_ids.resize(d[0]);
  std::iota(out.source_ids.begin(), out.source_ids.end(), 0);
  out.provenance.source = (std::filesystem::path(dir) / prefix).string();
  out.provenance.transforms.push_back("scale:1/255");
  return out;
}

Dataset Binarize(const Dataset& images, double threshold) {
  Dataset out = images;
  for (double& v : out.x.values()) v = v >= threshold ? 1.0 : 0.0;
  out.provenance.transforms.push_back(absl::StrCat("binarize:>=", threshold));
  return out;
}

absl::StatusOr<Dataset> BuildTrainingSet(const Dataset& full, int64_t n, bool inject_outlier,
                                         uint64_t seed) {
  if (n < 0 || n > full.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot draw ", n, " examples from a source of ", full.size()));
  }
  RngStream rng(seed, "build_training_set");
  const std::vector<int64_t> rows = SampleWithoutReplacement(full.size(), n, rng);
  Dataset out;
  Tensor picked = GatherRows(full.x, rows);
  for (int64_t r : rows) {
    out.source_ids.push_back(full.source_ids.empty() ? r : full.source_ids[r]);
    if (!full.labels.empty()) out.labels.push_back(full.labels[r]);
  }
  if (inject_outlier) {
    Shape shape = picked.shape();
    shape[0] += 1;
    Tensor with_outlier(shape);
    std::copy(picked.values().begin(), picked.values().end(), with_outlier.data());
    std::fill(with_outlier.data() + picked.size(), with_outlier.data() + with_outlier.size(), 1.0);
    picked = std::move(with_outlier);
    out.outlier_index = n;
    out.source_ids.push_back(-1);
    if (!full.labels.empty()) out.labels.push_back(-1);
  }
  out.x = std::move(picked);
  out.provenance = full.provenance;
  out.provenance.seed = seed;
  out.provenance.transforms.push_back(
      absl::StrCat("subsample:", n, inject_outlier ? "+outlier" : ""));
  return out;
}

absl::StatusOr<MiaSplit> MakeMiaSplit(const Dataset& train, const Dataset& test,
                                      int64_t n_members, int64_t n_nonmembers, uint64_t seed) {
  if (n_members < 0 || n_members > train.size() || n_nonmembers < 0 ||
      n_nonmembers > test.size()) {
    return absl::InvalidArgumentError(absl::StrCat("split sizes (", n_members, ", ", n_nonmembers,
                                                   ") exceed the available data (", train.size(),
                                                   ", ", test.size(), ")"));
  }
  RngStream rng(seed, "mia_split");
  RngStream member_rng = rng.Fork("members");
  RngStream nonmember_rng = rng.Fork("nonmembers");
  return MiaSplit{SampleWithoutReplacement(train.size(), n_members, member_rng),
                  SampleWithoutReplacement(test.size(), n_nonmembers, nonmember_rng)};
}

absl::StatusOr<MixtureDataset> GaussianMixture2d(int64_t n, int k, uint64_t seed) {
  if (n < 0 || k < 1) return absl::InvalidArgumentError("need n >= 0 and k >= 1");
  MixtureDataset out;
  out.means = Tensor({k, 2});
  for (int c = 0; c < k; ++c) {
    const double angle = 2 * std::numbers::pi * c / k;
    out.means[2 * c] = kMixtureRadius * std::cos(angle);
    out.means[2 * c + 1] = kMixtureRadius * std::sin(angle);
  }
  RngStream rng(seed, "gaussian_mixture_2d");
  Dataset& data = out.data;
  data.x = Tensor({n, 2});
  for (int64_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.NextBelow(k));
    data.labels.push_back(c);
    data.source_ids.push_back(i);
    data.x[2 * i] = out.means[2 * c] + kMixtureStd * rng.NextNormal();
    data.x[2 * i + 1] = out.means[2 * c + 1] + kMixtureStd * rng.NextNormal();
  }
  data.provenance.source = absl::StrCat("gaussian_mixture_2d:k=", k);
  data.provenance.seed = seed;
  return out;
}

}  // namespace lvae::data
