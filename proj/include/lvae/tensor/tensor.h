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

#ifndef LVAE_TENSOR_TENSOR_H_
#define LVAE_TENSOR_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvae {

using Shape = std::vector<int64_t>;

// Raised for shape mismatches, invalid geometry and checked-mode domain
// violations anywhere in the tensor engine.
class TensorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major array of doubles. Plain value type; copies are deep.
//
// Extents must be non-negative. A zero extent is only meaningful for the batch
// (leading) dimension, e.g. an empty generated batch.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor Full(Shape shape, double value);
  static Tensor Ones(Shape shape) { return Full(std::move(shape), 1.0); }
  static Tensor Scalar(double value) { return Full({}, value); }
  static Tensor FromList(Shape shape, std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const;
  int64_t size() const { return static_cast<int64_t>(values_.size()); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](int64_t i) { return values_[i]; }
  double operator[](int64_t i) const { return values_[i]; }

  // Value of a single-element tensor.
  double item() const;

  // Same values, new shape; element counts must agree.
  Tensor Reshaped(Shape shape) const&;
  Tensor Reshaped(Shape shape) &&;

  bool AllFinite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Checked mode makes every op verify that its output is finite and that log
// and sqrt receive arguments in their domain. Process-wide; off by default.
void SetCheckedMode(bool enabled);
bool CheckedMode();

}  // namespace lvae

#endif  // LVAE_TENSOR_TENSOR_H_
