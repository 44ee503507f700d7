// Copyright 2026 The fndkit Authors.
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

#include "fndkit/tensor.h"

#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace fndkit {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ", "));
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_numel(shape_)) {
    throw std::invalid_argument(fmt::format(
        "tensor of shape {} needs {} values, got {}", shape_string(shape_),
        shape_numel(shape_), values_.size()));
  }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::out_of_range(fmt::format("axis {} out of range for shape {}",
                                        axis, shape_string(shape_)));
  }
  return shape_[axis];
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw std::out_of_range(fmt::format("index of rank {} into shape {}",
                                        index.size(), shape_string(shape_)));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw std::out_of_range(fmt::format("index {} out of range on axis {} of {}",
                                          i, axis, shape_string(shape_)));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return values_[flat_index(index)];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return values_[flat_index(index)];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw std::logic_error(fmt::format("item() on tensor of shape {}",
                                       shape_string(shape_)));
  }
  return values_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != values_.size()) {
    throw std::invalid_argument(fmt::format("cannot reshape {} to {}",
                                            shape_string(shape_),
                                            shape_string(shape)));
  }
  return Tensor(std::move(shape), values_);
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void expect_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw std::invalid_argument(fmt::format("{} must have rank {}, got shape {}",
                                            what, rank, shape_string(t.shape())));
  }
}

}  // namespace fndkit
