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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fndkit/error.h"
#include "fndkit/layers.h"
#include "fndkit/ops.h"
#include "oracles.h"
#include "synthetic.h"

namespace fndkit {
namespace {

using testing::dense_gcn;
using testing::hand_attention;
using testing::naive_dct2d;
using testing::random_tensor;

TEST(Dct, MatchesNaiveDoubleSum) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 8; ++n) {
    const Tensor x = random_tensor({n, n}, rng);
    const Tensor fast = layers::dct2d(x);
    const Tensor slow = naive_dct2d(x);
    for (std::size_t i = 0; i < n * n; ++i) EXPECT_NEAR(fast[i], slow[i], 1e-9) << "N=" << n;
  }
}

TEST(Dct, ConstantBlockIsDcOnly) {
  const double c = 0.37;
  const Tensor coeffs = layers::dct2d(Tensor({8, 8}, c));
  EXPECT_NEAR(coeffs[0], 8.0 * c, 1e-9);
  for (std::size_t i = 1; i < 64; ++i) EXPECT_NEAR(coeffs[i], 0.0, 1e-9);
}

TEST(Dct, InverseRoundTrip) {
  std::mt19937_64 rng(12);
  const Tensor x = random_tensor({8, 8}, rng);
  const Tensor back = layers::idct2d(layers::dct2d(x));
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(back[i], x[i], 1e-6);
}

TEST(Dct, BasisImagesAreOrthonormal) {
  for (std::size_t n : {1u, 3u, 4u, 8u}) {
    std::vector<Tensor> images;
    for (std::size_t k = 0; k < n * n; ++k) {
      Tensor e({n, n});
      e[k] = 1.0;
      images.push_back(layers::dct2d(e));
    }
    for (std::size_t a = 0; a < images.size(); ++a) {
      for (std::size_t b = a; b < images.size(); ++b) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n * n; ++i) dot += images[a][i] * images[b][i];
        EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-9);
      }
    }
  }
}

TEST(Dct, RejectsNonSquare) {
  EXPECT_THROW(layers::dct2d(Tensor({2, 3})), std::invalid_argument);
  EXPECT_THROW(layers::idct2d(Tensor({4})), std::invalid_argument);
}

TEST(Dct, DifferentiableVariantAgreesAndBackpropagates) {
  std::mt19937_64 rng(13);
  const Tensor x = random_tensor({4, 4}, rng);
  Var block = parameter(x);
  Var coeffs = layers::dct2d(block);
  EXPECT_EQ(coeffs.value(), layers::dct2d(x));
  // sum of squares is preserved by an orthonormal transform, so d/dX = 2X.
  backward(ops::reshape(ops::matmul(ops::reshape(ops::mul(coeffs, coeffs), {1, 16}),
                                    constant(Tensor({16, 1}, 1.0))),
                        {1}));
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(block.grad()[i], 2.0 * x[i], 1e-9);
}

Tensor random_graph(std::size_t n, std::mt19937_64& rng) {
  Tensor a({n, n});
  std::bernoulli_distribution edge(0.3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edge(rng)) a[i * n + j] = a[j * n + i] = 1.0;
    }
  }
  return a;
}

TEST(Gcn, MatchesDenseOracleOnRandomGraphs) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor a = random_graph(12, rng);
    const Tensor x = random_tensor({12, 5}, rng);
    const Tensor w = random_tensor({5, 3}, rng);
    for (bool relu : {true, false}) {
      const Tensor got = layers::gcn_layer(constant(x), a, constant(w),
                                           relu ? layers::Activation::kRelu
                                                : layers::Activation::kIdentity)
                             .value();
      const Tensor want = dense_gcn(x, a, w, relu);
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
    }
  }
}

TEST(Gcn, EmptyGraphIsPlainProjection) {
  std::mt19937_64 rng(15);
  const Tensor x = random_tensor({4, 3}, rng), w = random_tensor({3, 2}, rng);
  const Tensor got = layers::gcn_layer(constant(x), Tensor({4, 4}), constant(w)).value();
  const Tensor want = ops::relu(ops::matmul(constant(x), constant(w))).value();
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Gcn, TwoNodeCompleteGraphAveragesRows) {
  const Tensor x({2, 2}, std::vector<double>{1.0, 2.0, 5.0, -4.0});
  const Tensor a({2, 2}, std::vector<double>{0.0, 1.0, 1.0, 0.0});
  const Tensor eye({2, 2}, std::vector<double>{1.0, 0.0, 0.0, 1.0});
  const Tensor out =
      layers::gcn_layer(constant(x), a, constant(eye), layers::Activation::kIdentity).value();
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(out[r * 2 + 0], 3.0, 1e-12);
    EXPECT_NEAR(out[r * 2 + 1], -1.0, 1e-12);
  }
}

TEST(Gcn, RejectsInvalidAdjacency) {
  const Var x = constant(Tensor({2, 1}, 1.0));
  const Var w = constant(Tensor({1, 1}, 1.0));
  EXPECT_THROW(layers::gcn_layer(x, Tensor({2, 2}, std::vector<double>{0, 1, 0, 0}), w),
               std::invalid_argument);
  EXPECT_THROW(layers::gcn_layer(x, Tensor({2, 2}, std::vector<double>{1, 0, 0, 0}), w),
               std::invalid_argument);
  EXPECT_THROW(layers::gcn_layer(x, Tensor({3, 3}), w), std::invalid_argument);
  EXPECT_THROW(layers::gcn_layer(x, Tensor({2, 2}), constant(Tensor({2, 1}))),
               std::invalid_argument);
}

TEST(CoAttention, TwoByTwoMatchesHandComputation) {
  ParameterList params;
  std::mt19937_64 rng(16);
  layers::CoAttention co(params, "co", 2, rng);
  co.set_identity();
  const std::vector<std::vector<double>> text{{0.3, -1.2}, {0.8, 0.5}};
  const std::vector<std::vector<double>> image{{1.1, 0.4}, {-0.6, 0.9}};
  const Tensor t({1, 2, 2}, std::vector<double>{0.3, -1.2, 0.8, 0.5});
  const Tensor i({1, 2, 2}, std::vector<double>{1.1, 0.4, -0.6, 0.9});
  const Tensor fused = co(constant(t), constant(i)).value();
  ASSERT_EQ(fused.shape(), (Shape{1, 4}));
  const auto t2i = hand_attention(text, image);
  const auto i2t = hand_attention(image, text);
  EXPECT_NEAR(fused[0], t2i[0], 1e-9);
  EXPECT_NEAR(fused[1], t2i[1], 1e-9);
  EXPECT_NEAR(fused[2], i2t[0], 1e-9);
  EXPECT_NEAR(fused[3], i2t[1], 1e-9);
}

TEST(CoAttention, IdenticalImageKeysGiveUniformWeights) {
  ParameterList params;
  std::mt19937_64 rng(17);
  layers::CoAttention co(params, "co", 3, rng);
  const Tensor text = random_tensor({2, 4, 3}, rng);
  Tensor image({2, 5, 3});
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t j = 0; j < 5; ++j) {
      for (std::size_t d = 0; d < 3; ++d) image[(b * 5 + j) * 3 + d] = 0.1 * (d + 1) + b;
    }
  }
  const Tensor w = co.text_to_image_weights(text, image);
  for (double v : w.values()) EXPECT_NEAR(v, 0.2, 1e-12);
}

TEST(CoAttention, SingleImageRegionReturnsItsValueProjection) {
  ParameterList params;
  std::mt19937_64 rng(18);
  layers::CoAttention co(params, "co", 3, rng);
  const Tensor text = random_tensor({1, 4, 3}, rng);
  const Tensor image = random_tensor({1, 1, 3}, rng);
  const Tensor fused = co(constant(text), constant(image)).value();
  const Tensor value =
      ops::matmul(constant(image), *params.find("co.image_value")).value();
  for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(fused[d], value[d], 1e-12);
}

TEST(CoAttention, RejectsDimensionMismatch) {
  ParameterList params;
  std::mt19937_64 rng(19);
  layers::CoAttention co(params, "co", 2, rng);
  EXPECT_THROW(co(constant(Tensor({1, 2, 2})), constant(Tensor({1, 2, 3}))),
               std::invalid_argument);
}

TEST(TextCnnLayer, OutputShape) {
  ParameterList params;
  std::mt19937_64 rng(20);
  layers::TextCnnLayer cnn(params, "cnn", 8, {3, 4, 5}, 100, rng);
  const Var out = cnn(constant(random_tensor({2, 10, 8}, rng)));
  EXPECT_EQ(out.shape(), (Shape{2, 300}));
  EXPECT_EQ(cnn.output_dim(), 300u);
}

TEST(TextCnnLayer, ZeroInputAndBiasGiveZeroOutput) {
  ParameterList params;
  std::mt19937_64 rng(21);
  layers::TextCnnLayer cnn(params, "cnn", 4, {2, 3}, 5, rng);
  for (auto& [name, var] : params) {
    if (name.ends_with(".bias")) var.mutable_value().fill(0.0);
  }
  const Var out = cnn(constant(Tensor({3, 6, 4})));
  for (double v : out.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(TextCnnLayer, DuplicatingTheMaximalWindowChangesNothing) {
  ParameterList params;
  std::mt19937_64 rng(22);
  layers::TextCnnLayer cnn(params, "cnn", 2, {1}, 1, rng);
  const Tensor x({1, 3, 2}, std::vector<double>{0.1, 0.2, 0.9, -0.3, 0.4, 0.4});
  const Tensor base = cnn(constant(x)).value();
  // Find the argmax position of the single kernel and append a copy of it.
  const Var conv = ops::conv1d_time(constant(x), *params.find("cnn.conv1.weight"),
                                    *params.find("cnn.conv1.bias"));
  std::size_t best = 0;
  for (std::size_t t = 1; t < 3; ++t) {
    if (conv.value()[t] > conv.value()[best]) best = t;
  }
  std::vector<double> longer(x.values().begin(), x.values().end());
  longer.push_back(x[best * 2]);
  longer.push_back(x[best * 2 + 1]);
  EXPECT_EQ(cnn(constant(Tensor({1, 4, 2}, longer))).value(), base);
}

TEST(TextCnnLayer, ShortSequenceIsAModelError) {
  ParameterList params;
  std::mt19937_64 rng(23);
  layers::TextCnnLayer cnn(params, "cnn", 2, {3}, 1, rng);
  EXPECT_THROW(cnn(constant(Tensor({1, 2, 2}))), ModelError);
}

TEST(Initialization, FanInUniformBoundsAndEmbeddingSpread) {
  std::mt19937_64 rng(24);
  const Tensor w = layers::uniform_fan_in({50, 40}, 50, rng);
  const double bound = std::sqrt(1.0 / 50.0);
  for (double v : w.values()) EXPECT_LE(std::abs(v), bound);
  const Tensor e = layers::normal_embedding(200, 50, rng);
  double sq = 0.0;
  for (double v : e.values()) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(e.size())), 0.1, 0.01);
}

}  // namespace
}  // namespace fndkit
