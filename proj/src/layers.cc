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

#include "fndkit/layers.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "fndkit/error.h"
#include "fndkit/ops.h"

namespace fndkit {

Var ParameterList::add(std::string name, Tensor init) {
  if (find(name) != nullptr) {
    throw std::logic_error("duplicate parameter name: " + name);
  }
  Var v = parameter(std::move(init));
  entries_.emplace_back(std::move(name), v);
  return v;
}

std::size_t ParameterList::numel() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v.value().size();
  return n;
}

const Var* ParameterList::find(std::string_view name) const {
  for (const auto& entry : entries_) {
    if (entry.first == name) return &entry.second;
  }
  return nullptr;
}

const Var& ParameterList::at(std::string_view name) const {
  const Var* v = find(name);
  if (v == nullptr) throw std::out_of_range(fmt::format("no parameter named '{}'", name));
  return *v;
}

void ParameterList::zero_grad() {
  for (auto& entry : entries_) entry.second.zero_grad();
}

namespace layers {

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Tensor normal_embedding(std::size_t rows, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 0.1);
  Tensor t({rows, dim});
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Linear::Linear(ParameterList& params, const std::string& prefix, std::size_t in,
               std::size_t out, std::mt19937_64& rng)
    : weight_(params.add(prefix + ".weight", uniform_fan_in({in, out}, in, rng))),
      bias_(params.add(prefix + ".bias", uniform_fan_in({out}, in, rng))) {}

Var Linear::operator()(const Var& x) const {
  return ops::add_bias(ops::matmul(x, weight_), bias_);
}

Embedding::Embedding(ParameterList& params, const std::string& prefix, std::size_t rows,
                     std::size_t dim, std::mt19937_64& rng)
    : weight_(params.add(prefix + ".weight", normal_embedding(rows, dim, rng))) {}

Var Embedding::operator()(const Tensor& ids) const { return ops::embedding(weight_, ids); }

TextCnnLayer::TextCnnLayer(ParameterList& params, const std::string& prefix,
                           std::size_t embed_dim, std::vector<std::size_t> filter_sizes,
                           std::size_t channels, std::mt19937_64& rng)
    : filter_sizes_(std::move(filter_sizes)), channels_(channels) {
  if (filter_sizes_.empty() || channels_ == 0 || embed_dim == 0) {
    throw std::invalid_argument("TextCnnLayer needs filter sizes, channels and embed_dim > 0");
  }
  for (std::size_t k : filter_sizes_) {
    if (k == 0) throw std::invalid_argument("TextCnnLayer filter size must be >= 1");
    const std::size_t fan_in = k * embed_dim;
    weights_.push_back(params.add(fmt::format("{}.conv{}.weight", prefix, k),
                                  uniform_fan_in({channels_, fan_in}, fan_in, rng)));
    biases_.push_back(params.add(fmt::format("{}.conv{}.bias", prefix, k),
                                 uniform_fan_in({channels_}, fan_in, rng)));
  }
}

Var TextCnnLayer::operator()(const Var& embedded) const {
  if (embedded.shape().size() != 3) {
    throw ModelError("textcnn input must be [B, L, D], got " + shape_string(embedded.shape()));
  }
  const std::size_t len = embedded.shape()[1];
  for (std::size_t k : filter_sizes_) {
    if (len < k) {
      throw ModelError(fmt::format("sequence length {} is smaller than filter size {}", len, k));
    }
  }
  std::vector<Var> pooled;
  pooled.reserve(filter_sizes_.size());
  for (std::size_t i = 0; i < filter_sizes_.size(); ++i) {
    Var conv = ops::relu(ops::conv1d_time(embedded, weights_[i], biases_[i]));
    pooled.push_back(ops::max_over_time(conv));
  }
  return pooled.size() == 1 ? pooled[0] : ops::concat_last(pooled);
}

Tensor dct_matrix(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dct_matrix: size must be >= 1");
  Tensor c({n, n});
  const double nd = static_cast<double>(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double alpha = u == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (std::size_t x = 0; x < n; ++x) {
      c[u * n + x] = alpha * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) *
                                      static_cast<double>(u) / (2.0 * nd));
    }
  }
  return c;
}

namespace {

std::size_t square_side(const Tensor& block, const char* what) {
  if (block.rank() != 2 || block.dim(0) != block.dim(1) || block.dim(0) == 0) {
    throw std::invalid_argument(fmt::format("{}: expected a non-empty square block, got {}",
                                            what, shape_string(block.shape())));
  }
  return block.dim(0);
}

// out = L * X * R with L, X, R all n x n.
Tensor sandwich(const Tensor& left, const Tensor& x, const Tensor& right, std::size_t n) {
  Tensor tmp({n, n});
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double l = left[i * n + k];
      for (std::size_t j = 0; j < n; ++j) tmp[i * n + j] += l * x[k * n + j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double t = tmp[i * n + k];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += t * right[k * n + j];
    }
  }
  return out;
}

Tensor transposed(const Tensor& m, std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[j * n + i] = m[i * n + j];
  }
  return t;
}

}  // namespace

Tensor dct2d(const Tensor& block) {
  const std::size_t n = square_side(block, "dct2d");
  const Tensor c = dct_matrix(n);
  return sandwich(c, block, transposed(c, n), n);
}

Tensor idct2d(const Tensor& coefficients) {
  const std::size_t n = square_side(coefficients, "idct2d");
  const Tensor c = dct_matrix(n);
  return sandwich(transposed(c, n), coefficients, c, n);
}

Var dct2d(const Var& block) {
  const std::size_t n = square_side(block.value(), "dct2d");
  const Tensor c = dct_matrix(n);
  Var left = constant(c);
  Var right = constant(transposed(c, n));
  // matmul treats its first operand as the data rows: C * X then (C X) * C^T.
  return ops::matmul(ops::matmul(left, block), right);
}

CoAttention::CoAttention(ParameterList& params, const std::string& prefix, std::size_t dim,
                         std::mt19937_64& rng)
    : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("CoAttention dim must be >= 1");
  auto proj = [&](const char* name) {
    return params.add(fmt::format("{}.{}", prefix, name), uniform_fan_in({dim, dim}, dim, rng));
  };
  text_query_ = proj("text_query");
  image_key_ = proj("image_key");
  image_value_ = proj("image_value");
  image_query_ = proj("image_query");
  text_key_ = proj("text_key");
  text_value_ = proj("text_value");
}

void CoAttention::set_identity() {
  for (Var* v : {&text_query_, &image_key_, &image_value_, &image_query_, &text_key_,
                 &text_value_}) {
    Tensor& w = v->mutable_value();
    w.fill(0.0);
    for (std::size_t i = 0; i < dim_; ++i) w[i * dim_ + i] = 1.0;
  }
}

namespace {

void check_coattention_inputs(const Shape& text, const Shape& image, std::size_t dim) {
  if (text.size() != 3 || image.size() != 3) {
    throw std::invalid_argument(fmt::format("coattention inputs must be rank 3, got {} and {}",
                                            shape_string(text), shape_string(image)));
  }
  if (text[2] != image[2]) {
    throw std::invalid_argument(fmt::format(
        "coattention feature dim mismatch: text {} vs image {}", text[2], image[2]));
  }
  if (text[2] != dim) {
    throw std::invalid_argument(fmt::format("coattention layer has dim {}, inputs have {}",
                                            dim, text[2]));
  }
  if (text[0] != image[0]) {
    throw std::invalid_argument("coattention batch size mismatch");
  }
}

Var attend(const Var& queries, const Var& keys, const Var& values, std::size_t dim) {
  Var scores = ops::scale(ops::bmm(queries, keys, /*transpose_b=*/true),
                          1.0 / std::sqrt(static_cast<double>(dim)));
  return ops::bmm(ops::softmax(scores), values);
}

}  // namespace

Var CoAttention::operator()(const Var& text, const Var& image) const {
  check_coattention_inputs(text.shape(), image.shape(), dim_);
  Var text_to_image = attend(ops::matmul(text, text_query_), ops::matmul(image, image_key_),
                             ops::matmul(image, image_value_), dim_);
  Var image_to_text = attend(ops::matmul(image, image_query_), ops::matmul(text, text_key_),
                             ops::matmul(text, text_value_), dim_);
  std::vector<Var> pooled{ops::mean_over_time(text_to_image), ops::mean_over_time(image_to_text)};
  return ops::concat_last(pooled);
}

Tensor CoAttention::text_to_image_weights(const Tensor& text, const Tensor& image) const {
  check_coattention_inputs(text.shape(), image.shape(), dim_);
  NoGradGuard no_grad;
  Var q = ops::matmul(constant(text), text_query_);
  Var k = ops::matmul(constant(image), image_key_);
  Var scores = ops::scale(ops::bmm(q, k, true), 1.0 / std::sqrt(static_cast<double>(dim_)));
  return ops::softmax(scores).value();
}

Tensor normalized_adjacency(const Tensor& adjacency) {
  if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1)) {
    throw std::invalid_argument("adjacency must be square, got " +
                                shape_string(adjacency.shape()));
  }
  const std::size_t n = adjacency.dim(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i * n + i] != 0.0) {
      throw std::invalid_argument(fmt::format("adjacency has nonzero diagonal at node {}", i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency[i * n + j];
      if (a < 0.0) throw std::invalid_argument("adjacency has negative entries");
      if (a != adjacency[j * n + i]) {
        throw std::invalid_argument(fmt::format("adjacency is not symmetric at ({}, {})", i, j));
      }
    }
  }
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 1.0;
    for (std::size_t j = 0; j < n; ++j) degree += adjacency[i * n + j];
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency[i * n + j] + (i == j ? 1.0 : 0.0);
      out[i * n + j] = inv_sqrt_degree[i] * a * inv_sqrt_degree[j];
    }
  }
  return out;
}

Var gcn_layer(const Var& x, const Tensor& adjacency, const Var& weight, Activation activation) {
  if (x.shape().size() != 2 || weight.shape().size() != 2) {
    throw std::invalid_argument(fmt::format("gcn_layer: expected X[N, F] and W[F, F'], got {} and {}",
                                            shape_string(x.shape()), shape_string(weight.shape())));
  }
  const std::size_t n = x.shape()[0];
  if (adjacency.shape() != Shape{n, n}) {
    throw std::invalid_argument(fmt::format("gcn_layer: adjacency {} for {} nodes",
                                            shape_string(adjacency.shape()), n));
  }
  if (weight.shape()[0] != x.shape()[1]) {
    throw std::invalid_argument(fmt::format("gcn_layer: weight {} for features {}",
                                            shape_string(weight.shape()), shape_string(x.shape())));
  }
  Tensor a_hat = normalized_adjacency(adjacency).reshaped({1, n, n});
  Var x3 = ops::reshape(x, {1, n, x.shape()[1]});
  Var out = gcn_layer_normalized(x3, a_hat, weight, activation);
  return ops::reshape(out, {n, weight.shape()[1]});
}

Var gcn_layer_normalized(const Var& x, const Tensor& a_hat, const Var& weight,
                         Activation activation) {
  Var propagated = ops::matmul(ops::bmm(constant(a_hat), x), weight);
  return activation == Activation::kRelu ? ops::relu(propagated) : propagated;
}

}  // namespace layers
}  // namespace fndkit
