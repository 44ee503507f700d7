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

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fndkit {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. Value type: copies are deep.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  // Multi-index access; bounds are checked.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  // Single value of a rank-0 (or one-element) tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;
  void fill(double value);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> values_;
};

// Throws std::invalid_argument unless `t` has exactly `rank` dimensions.
void expect_rank(const Tensor& t, std::size_t rank, const char* what);

}  // namespace fndkit
