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

#include <vector>

#include "fndkit/tensor.h"

// Deliberately naive reference computations shared by unit and acceptance
// tests. They use plain loops only, never the library kernels they check.
namespace fndkit::testing {

// Direct double sum of the orthonormal DCT-II definition.
Tensor naive_dct2d(const Tensor& x);

// D^{-1/2} (A + I) D^{-1/2} X W assembled entry by entry.
Tensor dense_gcn(const Tensor& x, const Tensor& a, const Tensor& w, bool relu);

// softmax(q.k / sqrt(D)) weighted keys, mean-pooled over queries. With
// identity projections this is one direction of co-attention.
std::vector<double> hand_attention(const std::vector<std::vector<double>>& queries,
                                   const std::vector<std::vector<double>>& keys);

}  // namespace fndkit::testing
