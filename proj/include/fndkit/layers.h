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

#include <random>
#include <string>
#include <vector>

#include "fndkit/autograd.h"
#include "fndkit/parameters.h"

// Reusable building blocks shared by the model zoo: text feature
// extraction, frequency-domain transforms, cross-modal fusion and graph
// convolution. Layers register their weights into a caller-owned
// ParameterList under a name prefix.
namespace fndkit::layers {

// Affine weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)).
Tensor uniform_fan_in(Shape shape, std::size_t fan_in, std::mt19937_64& rng);
// Embedding tables ~ N(0, 0.1).
Tensor normal_embedding(std::size_t rows, std::size_t dim, std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterList& params, const std::string& prefix, std::size_t in,
         std::size_t out, std::mt19937_64& rng);

  // x[..., in] -> [..., out]
  Var operator()(const Var& x) const;

  const Var& weight() const { return weight_; }
  const Var& bias() const { return bias_; }

 private:
  Var weight_;  // [in, out]
  Var bias_;    // [out]
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterList& params, const std::string& prefix, std::size_t rows,
            std::size_t dim, std::mt19937_64& rng);

  Var operator()(const Tensor& ids) const;
  const Var& weight() const { return weight_; }
  std::size_t rows() const { return weight_.shape()[0]; }

 private:
  Var weight_;
};

// Kim-style text CNN: for each filter size k a valid convolution over time
// with `channels` kernels, ReLU, then global max-pool; outputs concatenated
// in filter-size order.
class TextCnnLayer {
 public:
  TextCnnLayer() = default;
  TextCnnLayer(ParameterList& params, const std::string& prefix, std::size_t embed_dim,
               std::vector<std::size_t> filter_sizes, std::size_t channels,
               std::mt19937_64& rng);

  // embedded[B, L, D] -> [B, channels * |filter_sizes|]. Throws ModelError
  // when L is shorter than a filter.
  Var operator()(const Var& embedded) const;

  std::size_t output_dim() const { return channels_ * filter_sizes_.size(); }
  const std::vector<std::size_t>& filter_sizes() const { return filter_sizes_; }

 private:
  std::vector<std::size_t> filter_sizes_;
  std::size_t channels_ = 0;
  std::vector<Var> weights_;  // [channels, k * D]
  std::vector<Var> biases_;
};

// Orthonormal DCT-II basis: C[u][x] = a(u) cos(pi (2x + 1) u / 2N).
Tensor dct_matrix(std::size_t n);
// Orthonormal 2-D DCT-II of a square block and its exact inverse (DCT-III).
// Non-square input throws std::invalid_argument.
Tensor dct2d(const Tensor& block);
Tensor idct2d(const Tensor& coefficients);
// Differentiable variant for use inside models: C X C^T.
Var dct2d(const Var& block);

// Bidirectional scaled dot-product cross-attention between a text sequence
// and an image-region sequence. Each direction uses its own query/key/value
// projections; the attended sequences are mean-pooled and concatenated.
class CoAttention {
 public:
  CoAttention() = default;
  CoAttention(ParameterList& params, const std::string& prefix, std::size_t dim,
              std::mt19937_64& rng);

  // text[B, Lt, D], image[B, Li, D] -> [B, 2D] = [text->image ; image->text].
  Var operator()(const Var& text, const Var& image) const;

  // Overwrites every projection with the identity (used by tests and as a
  // projection-free fusion mode).
  void set_identity();

  std::size_t dim() const { return dim_; }

  // Attention weights of text queries over image keys, [B, Lt, Li].
  Tensor text_to_image_weights(const Tensor& text, const Tensor& image) const;

 private:
  std::size_t dim_ = 0;
  Var text_query_, image_key_, image_value_;
  Var image_query_, text_key_, text_value_;
};

enum class Activation { kRelu, kIdentity };

// D~^{-1/2} (A + I) D~^{-1/2} for a symmetric, zero-diagonal, non-negative A.
Tensor normalized_adjacency(const Tensor& adjacency);

// act(A_hat X W) for one graph: X[N, F], adjacency[N, N], W[F, F'].
Var gcn_layer(const Var& x, const Tensor& adjacency, const Var& weight,
              Activation activation = Activation::kRelu);

// Batched form with pre-normalized adjacency a_hat[B, N, N] and X[B, N, F].
Var gcn_layer_normalized(const Var& x, const Tensor& a_hat, const Var& weight,
                         Activation activation = Activation::kRelu);

}  // namespace fndkit::layers
