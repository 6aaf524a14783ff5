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

#include <array>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lvae/data/dataset.h"
#include "lvae/data/idx.h"

namespace lvae::data {
namespace {

// Two 2x2 images written byte by byte.
std::string ImageFixture() {
  const unsigned char bytes[] = {0x00, 0x00, 0x08, 0x03,  // magic
                                 0x00, 0x00, 0x00, 0x02,  // count
                                 0x00, 0x00, 0x00, 0x02,  // rows
                                 0x00, 0x00, 0x00, 0x02,  // cols
                                 0,    255,  128,  7,     // image 0
                                 1,    2,    3,    254};  // image 1
  return std::string(reinterpret_cast<const char*>(bytes), sizeof(bytes));
}

TEST(IdxTest, ParsesHandBuiltFixture) {
  const IdxArray a = *ParseIdx(ImageFixture(), kIdxImagesMagic);
  EXPECT_EQ(a.dims, (std::vector<int64_t>{2, 2, 2}));
  EXPECT_EQ(a.values, (std::vector<uint8_t>{0, 255, 128, 7, 1, 2, 3, 254}));
  const IdxArray z = *ParseIdx(*Gzip(ImageFixture()), kIdxImagesMagic);
  EXPECT_EQ(z.values, a.values);
  EXPECT_EQ(SerializeIdx(a), ImageFixture());
}

TEST(IdxTest, RejectsMalformedInput) {
  const std::string fixture = ImageFixture();
  EXPECT_EQ(ParseIdx(fixture.substr(0, fixture.size() - 1), kIdxImagesMagic).status().code(),
            absl::StatusCode::kDataLoss);
  EXPECT_FALSE(ParseIdx(fixture.substr(0, 10), kIdxImagesMagic).ok());
  EXPECT_FALSE(ParseIdx(fixture + "x", kIdxImagesMagic).ok());
  EXPECT_EQ(ParseIdx(fixture, kIdxLabelsMagic).status().code(),
            absl::StatusCode::kInvalidArgument);
  const std::string gz = *Gzip(fixture);
  EXPECT_FALSE(ParseIdx(gz.substr(0, gz.size() / 2), kIdxImagesMagic).ok());
}

TEST(IdxTest, RoundTripsLabels) {
  IdxArray labels{kIdxLabelsMagic, {5}, {3, 1, 4, 1, 5}};
  const IdxArray back = *ParseIdx(SerializeIdx(labels), kIdxLabelsMagic);
  EXPECT_EQ(back.dims, labels.dims);
  EXPECT_EQ(back.values, labels.values);
}

Dataset Pixels(std::vector<double> values) {
  Dataset d;
  const int64_t n = static_cast<int64_t>(values.size());
  d.x = Tensor({1, n}, std::move(values));
  return d;
}

TEST(BinarizeTest, InclusiveThresholdAndIdempotent) {
  const Dataset b = Binarize(Pixels({0.6, 0.5, 0.4999, 0.0, 1.0}));
  EXPECT_EQ(b.x, Tensor({1, 5}, {1, 1, 0, 0, 1}));
  EXPECT_EQ(Binarize(b).x, b.x);
  EXPECT_EQ(b.provenance.transforms.back(), "binarize:>=0.5");
}

Dataset Source(int64_t n) {
  Dataset d;
  d.x = Tensor({n, 28, 28, 1});
  for (int64_t i = 0; i < n; ++i) {
    d.x[i * 784] = 0.001 * static_cast<double>(i);
    d.source_ids.push_back(i);
    d.labels.push_back(static_cast<int>(i % 10));
  }
  return d;
}

TEST(TrainingSetTest, SizeOutlierAndDeterminism) {
  const Dataset full = Source(200);
  const Dataset a = *BuildTrainingSet(full, 99, true, 7);
  EXPECT_EQ(a.size(), 100);
  EXPECT_EQ(a.outlier_index, 99);
  double outlier_sum = 0;
  for (int64_t p = 0; p < 784; ++p) outlier_sum += a.x[99 * 784 + p];
  EXPECT_EQ(outlier_sum, 784.0);
  EXPECT_EQ(a.source_ids.back(), -1);
  std::set<int64_t> unique(a.source_ids.begin(), a.source_ids.end() - 1);
  EXPECT_EQ(unique.size(), 99u);
  for (int64_t r = 0; r < 99; ++r) {
    EXPECT_EQ(a.x[r * 784], 0.001 * static_cast<double>(a.source_ids[r]));
    EXPECT_EQ(a.labels[r], a.source_ids[r] % 10);
  }
  const Dataset b = *BuildTrainingSet(full, 99, true, 7);
  EXPECT_EQ(a.source_ids, b.source_ids);
  EXPECT_NE(BuildTrainingSet(full, 99, true, 8)->source_ids, a.source_ids);
  EXPECT_EQ(BuildTrainingSet(full, 99, false, 7)->size(), 99);
  EXPECT_FALSE(BuildTrainingSet(full, 201, true, 7).ok());
}

TEST(TrainingSetTest, SamplingIsUniform) {
  const int64_t source = 20, n = 5, seeds = 1000;
  const Dataset full = Source(source);
  std::vector<int> hits(source, 0);
  for (int64_t s = 0; s < seeds; ++s) {
    const Dataset sample = *BuildTrainingSet(full, n, false, s);
    for (int64_t id : sample.source_ids) ++hits[id];
  }
  const double p = static_cast<double>(n) / source;
  const double se = std::sqrt(p * (1 - p) / seeds);
  for (int64_t i = 0; i < source; ++i) {
    EXPECT_NEAR(static_cast<double>(hits[i]) / seeds, p, 3 * se) << i;
  }
}

TEST(MiaSplitTest, SizesAndDisjointness) {
  const Dataset train = Source(3000), test = Source(1500);
  const MiaSplit split = *MakeMiaSplit(train, test, 1000, 1000, 3);
  EXPECT_EQ(split.members.size(), 1000u);
  EXPECT_EQ(split.nonmembers.size(), 1000u);
  const std::set<int64_t> m(split.members.begin(), split.members.end());
  const std::set<int64_t> nm(split.nonmembers.begin(), split.nonmembers.end());
  EXPECT_EQ(m.size(), 1000u);
  EXPECT_EQ(nm.size(), 1000u);
  EXPECT_LT(*m.rbegin(), 3000);
  EXPECT_LT(*nm.rbegin(), 1500);
  EXPECT_EQ(MakeMiaSplit(train, test, 1000, 1000, 3)->members, split.members);
  EXPECT_FALSE(MakeMiaSplit(train, test, 1000, 2000, 3).ok());
}

// Lloyd iterations from a farthest-point initialization.
std::vector<std::array<double, 2>> KMeans(const Tensor& x, int k) {
  const int64_t n = x.dim(0);
  auto dist2 = [&](int64_t i, const std::array<double, 2>& c) {
    return std::pow(x[2 * i] - c[0], 2) + std::pow(x[2 * i + 1] - c[1], 2);
  };
  std::vector<std::array<double, 2>> centers = {{x[0], x[1]}};
  while (static_cast<int>(centers.size()) < k) {
    int64_t best = 0;
    double best_d = -1;
    for (int64_t i = 0; i < n; ++i) {
      double d = 1e300;
      for (const auto& c : centers) d = std::min(d, dist2(i, c));
      if (d > best_d) best_d = d, best = i;
    }
    centers.push_back({x[2 * best], x[2 * best + 1]});
  }
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::array<double, 3>> acc(k, {0, 0, 0});
    for (int64_t i = 0; i < n; ++i) {
      int arg = 0;
      for (int c = 1; c < k; ++c) arg = dist2(i, centers[c]) < dist2(i, centers[arg]) ? c : arg;
      acc[arg][0] += x[2 * i];
      acc[arg][1] += x[2 * i + 1];
      acc[arg][2] += 1;
    }
    for (int c = 0; c < k; ++c) centers[c] = {acc[c][0] / acc[c][2], acc[c][1] / acc[c][2]};
  }
  return centers;
}

TEST(MixtureTest, MeansRecoveredByClustering) {
  const MixtureDataset m = *GaussianMixture2d(4000, 4, 11);
  const auto centers = KMeans(m.data.x, 4);
  for (int c = 0; c < 4; ++c) {
    double best = 1e300;
    for (const auto& center : centers) {
      best = std::min(best, std::hypot(center[0] - m.means[2 * c], center[1] - m.means[2 * c + 1]));
    }
    EXPECT_LT(best, 0.1) << c;
  }
  EXPECT_EQ(GaussianMixture2d(0, 4, 11)->data.size(), 0);
  EXPECT_EQ(GaussianMixture2d(50, 3, 2)->data.x, GaussianMixture2d(50, 3, 2)->data.x);
  EXPECT_FALSE(GaussianMixture2d(10, 0, 2).ok());
}

std::string DataDir() {
  if (const char* env = std::getenv("LVAE_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return LVAE_DEFAULT_DATA_DIR;
}

TEST(MnistTest, LoadsRealFiles) {
  const std::string dir = DataDir();
  absl::StatusOr<Dataset> train = LoadMnist(dir, "train");
  if (!train.ok()) GTEST_SKIP() << "MNIST not available: " << train.status();
  EXPECT_EQ(train->x.shape(), (Shape{60000, 28, 28, 1}));
  EXPECT_EQ(train->labels.size(), 60000u);
  double lo = 1, hi = 0;
  for (double v : train->x.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 1.0);
  EXPECT_EQ(train->labels[0], 5);
  const Dataset test = *LoadMnist(dir, "t10k");
  EXPECT_EQ(test.size(), 10000);
  EXPECT_EQ(test.labels[0], 7);
}

}  // namespace
}  // namespace lvae::data
