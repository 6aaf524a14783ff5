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

#include "lvae/tensor/rng.h"

#include <cmath>
#include <numbers>

namespace lvae {
namespace {

// SplitMix64 finalizer.
constexpr uint64_t Mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t HashLabel(std::string_view label) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(uint64_t seed, std::string label, uint64_t counter)
    : seed_(seed),
      label_(std::move(label)),
      key_(Mix(seed ^ Mix(HashLabel(label_)))),
      counter_(counter) {}

uint64_t RngStream::NextU64() { return Mix(key_ ^ Mix(counter_++)); }

double RngStream::NextUniform() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::NextNormal() {
  const double u1 = NextUniform();
  const double u2 = NextUniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t RngStream::NextBelow(uint64_t n) {
  // Rejection sampling keeps the draw exactly uniform.
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

RngStream RngStream::Fork(std::string_view sublabel) const {
  return RngStream(seed_, label_ + "/" + std::string(sublabel));
}

Tensor RandomNormal(const Shape& shape, RngStream& rng) {
  if (shape.empty() || NumElements(shape) == 0) {
    throw TensorError("RandomNormal needs a non-empty shape, got " +
                      ShapeToString(shape));
  }
  Tensor t(shape);
  for (double& v : t.values()) v = rng.NextNormal();
  return t;
}

Tensor RandomUniform(const Shape& shape, double lo, double hi, RngStream& rng) {
  Tensor t(shape);
  for (double& v : t.values()) v = lo + (hi - lo) * rng.NextUniform();
  return t;
}

}  // namespace lvae
