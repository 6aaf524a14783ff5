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

#ifndef LVAE_TENSOR_RNG_H_
#define LVAE_TENSOR_RNG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "lvae/tensor/tensor.h"

namespace lvae {

// Counter-based random stream. Draw number k of the stream (seed, label) is a
// pure function of (seed, label, k), so streams with distinct labels never
// interact and results do not depend on the order in which streams are used.
class RngStream {
 public:
  RngStream(uint64_t seed, std::string label, uint64_t counter = 0);

  uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }
  uint64_t counter() const { return counter_; }
  void set_counter(uint64_t counter) { counter_ = counter; }

  uint64_t NextU64();
  // Uniform on the open interval (0, 1).
  double NextUniform();
  // Standard normal via Box-Muller; consumes two counters per draw.
  double NextNormal();
  // Uniform integer in [0, n). n must be positive.
  uint64_t NextBelow(uint64_t n);

  // A new stream keyed by this stream's seed and "label/sublabel".
  RngStream Fork(std::string_view sublabel) const;

 private:
  uint64_t seed_;
  std::string label_;
  uint64_t key_;
  uint64_t counter_;
};

// Tensor of i.i.d. N(0, 1) draws. Throws on an empty shape or zero extent.
Tensor RandomNormal(const Shape& shape, RngStream& rng);

// Tensor of i.i.d. U(lo, hi) draws.
Tensor RandomUniform(const Shape& shape, double lo, double hi, RngStream& rng);

}  // namespace lvae

#endif  // LVAE_TENSOR_RNG_H_
