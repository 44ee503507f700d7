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
#include <span>

#include "fndkit/autograd.h"

// Differentiable primitives. Shapes are checked eagerly and violations throw
// std::invalid_argument; every op records its own backward rule.
namespace fndkit::ops {

Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
// `bias` has shape [N] and is broadcast over the last axis of `x`.
Var add_bias(const Var& x, const Var& bias);

// x[..., K] times w[K, N] -> [..., N].
Var matmul(const Var& x, const Var& w);
// a[B, M, K] times b[B, K, N] (or b[B, N, K] transposed) -> [B, M, N].
Var bmm(const Var& a, const Var& b, bool transpose_b = false);

Var relu(const Var& x);
Var reshape(const Var& x, Shape shape);

// Row lookup. `ids` may have any shape; result is ids.shape + [D].
Var embedding(const Var& weight, const Tensor& ids);

// Valid 1-D convolution over the time axis of x[B, L, D] with a kernel
// flattened as weight[C, k * D]; result [B, L - k + 1, C].
Var conv1d_time(const Var& x, const Var& weight, const Var& bias);

// Reductions over axis 1 of a rank-3 input.
Var max_over_time(const Var& x);
Var mean_over_time(const Var& x);
// Mean over positions where mask[b, t] != 0; all-masked rows give zeros.
Var masked_mean_over_time(const Var& x, const Tensor& mask);

// Concatenation along the last axis; leading dims must agree.
Var concat_last(std::span<const Var> parts);
// parts[e] of shape [B, F] -> [B, E, F].
Var stack_middle(std::span<const Var> parts);

// Softmax along the last axis.
Var softmax(const Var& x);
// Mean negative log-likelihood of integer `labels` under softmax(logits).
Var cross_entropy(const Var& logits, const Tensor& labels);

// Inverted dropout; identity when not training or p == 0.
Var dropout(const Var& x, double p, bool training, std::mt19937_64& rng);

// Identity forward; backward multiplies the upstream gradient by -lambda.
Var gradient_reversal(const Var& x, double lambda);

// Sum of one-element tensors.
Var sum_scalars(std::span<const Var> terms);

}  // namespace fndkit::ops
