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

#include "lvae/tensor/tensor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace lvae {
namespace {

std::atomic<bool> checked_mode{false};

void ValidateShape(const Shape& shape) {
  for (int64_t extent : shape) {
    if (extent < 0) {
      throw TensorError("negative extent in shape " + ShapeToString(shape));
    }
  }
}

}  // namespace

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t extent : shape) n *= extent;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  ValidateShape(shape_);
  values_.assign(NumElements(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  ValidateShape(shape_);
  if (NumElements(shape_) != static_cast<int64_t>(values_.size())) {
    throw TensorError("shape " + ShapeToString(shape_) + " needs " +
                      std::to_string(NumElements(shape_)) + " values, got " +
                      std::to_string(values_.size()));
  }
}

Tensor Tensor::Full(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.values_.begin(), t.values_.end(), value);
  return t;
}

Tensor Tensor::FromList(Shape shape, std::initializer_list<double> values) {
  return Tensor(std::move(shape), std::vector<double>(values));
}

int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw TensorError("axis out of range for shape " + ShapeToString(shape_));
  }
  return shape_[axis];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw TensorError("item() on tensor of shape " + ShapeToString(shape_));
  }
  return values_[0];
}

Tensor Tensor::Reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).Reshaped(std::move(shape));
}

Tensor Tensor::Reshaped(Shape shape) && {
  ValidateShape(shape);
  if (NumElements(shape) != size()) {
    throw TensorError("cannot reshape " + ShapeToString(shape_) + " to " +
                      ShapeToString(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void SetCheckedMode(bool enabled) { checked_mode.store(enabled); }
bool CheckedMode() { return checked_mode.load(); }

}  // namespace lvae
