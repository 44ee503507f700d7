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
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fndkit/autograd.h"
#include "fndkit/ops.h"
#include "synthetic.h"

namespace fndkit {
namespace {

using testing::random_tensor;

// sum(out * weights) as a [1, 1] scalar, so every output entry matters.
Var weighted_sum(const Var& out, const Tensor& weights) {
  const std::size_t n = out.value().size();
  Var flat = ops::reshape(out, {1, n});
  return ops::matmul(flat, constant(weights.reshaped({n, 1})));
}

// Checks d(weighted_sum(f(inputs)))/d(inputs) against central differences.
void expect_gradients_match(const std::function<Var(std::vector<Var>&)>& f,
                            std::vector<Tensor> values, double tol = 1e-6) {
  std::vector<Var> inputs;
  for (auto& v : values) inputs.push_back(parameter(v));
  std::mt19937_64 rng(7);
  const Tensor probe = [&] {
    Var out = f(inputs);
    return random_tensor(out.shape(), rng);
  }();
  backward(weighted_sum(f(inputs), probe));
  auto loss = [&] {
    NoGradGuard guard;
    return weighted_sum(f(inputs), probe).value().item();
  };
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = inputs[k].grad();
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double numeric = testing::numeric_gradient(inputs[k], i, loss);
      EXPECT_NEAR(analytic[i], numeric, tol * std::max(1.0, std::abs(numeric)))
          << "input " << k << " entry " << i;
    }
  }
}

TEST(Tensor, ShapeAndBounds) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.at({1, 2}), 1.5);
  EXPECT_THROW(t.at({2, 0}), std::out_of_range);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
}

TEST(Autograd, ParameterGradientsAccumulateUntilZeroed) {
  Var w = parameter(Tensor({1}, 2.0));
  Var loss = ops::mul(w, w);
  backward(loss);
  EXPECT_DOUBLE_EQ(w.grad()[0], 4.0);
  backward(ops::mul(w, w));
  EXPECT_DOUBLE_EQ(w.grad()[0], 8.0);
  w.zero_grad();
  EXPECT_DOUBLE_EQ(w.grad()[0], 0.0);
}

TEST(Autograd, SharedSubexpressionGetsBothContributions) {
  Var x = parameter(Tensor({1}, 3.0));
  Var y = ops::add(x, x);
  backward(ops::mul(y, x));  // 2x^2 -> 4x
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Autograd, NoGradGuardRecordsNothing) {
  Var x = parameter(Tensor({2}, 1.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    Var y = ops::scale(x, 2.0);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(ops::scale(x, 2.0).requires_grad());
}

TEST(Autograd, BackwardNeedsScalarRoot) {
  Var x = parameter(Tensor({2}, 1.0));
  EXPECT_THROW(backward(ops::scale(x, 2.0)), std::invalid_argument);
}

TEST(OpsGradient, Elementwise) {
  std::mt19937_64 rng(1);
  const Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 3}, rng);
  expect_gradients_match([](auto& in) { return ops::add(in[0], in[1]); }, {a, b});
  expect_gradients_match([](auto& in) { return ops::mul(in[0], in[1]); }, {a, b});
  expect_gradients_match([](auto& in) { return ops::scale(in[0], -2.5); }, {a});
  expect_gradients_match([](auto& in) { return ops::relu(in[0]); }, {a});
  expect_gradients_match([](auto& in) { return ops::add_bias(in[0], in[1]); },
                         {random_tensor({2, 4, 3}, rng), random_tensor({3}, rng)});
}

TEST(OpsGradient, MatrixProducts) {
  std::mt19937_64 rng(2);
  expect_gradients_match([](auto& in) { return ops::matmul(in[0], in[1]); },
                         {random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng)});
  expect_gradients_match([](auto& in) { return ops::bmm(in[0], in[1]); },
                         {random_tensor({2, 3, 4}, rng), random_tensor({2, 4, 2}, rng)});
  expect_gradients_match([](auto& in) { return ops::bmm(in[0], in[1], true); },
                         {random_tensor({2, 3, 4}, rng), random_tensor({2, 5, 4}, rng)});
}

TEST(OpsGradient, SequenceOps) {
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor({2, 6, 3}, rng);
  expect_gradients_match(
      [](auto& in) { return ops::conv1d_time(in[0], in[1], in[2]); },
      {x, random_tensor({4, 2 * 3}, rng), random_tensor({4}, rng)});
  expect_gradients_match([](auto& in) { return ops::max_over_time(in[0]); }, {x});
  expect_gradients_match([](auto& in) { return ops::mean_over_time(in[0]); }, {x});
  const Tensor mask({2, 6}, std::vector<double>{1, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 0});
  expect_gradients_match(
      [&mask](auto& in) { return ops::masked_mean_over_time(in[0], mask); }, {x});
}

TEST(OpsGradient, Structural) {
  std::mt19937_64 rng(4);
  expect_gradients_match(
      [](auto& in) {
        const Var parts[] = {in[0], in[1]};
        return ops::concat_last(parts);
      },
      {random_tensor({2, 3}, rng), random_tensor({2, 2}, rng)});
  expect_gradients_match(
      [](auto& in) {
        const Var parts[] = {in[0], in[1], in[2]};
        return ops::stack_middle(parts);
      },
      {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)});
  expect_gradients_match([](auto& in) { return ops::reshape(in[0], {3, 2}); },
                         {random_tensor({2, 3}, rng)});
}

TEST(OpsGradient, SoftmaxAndCrossEntropy) {
  std::mt19937_64 rng(5);
  expect_gradients_match([](auto& in) { return ops::softmax(in[0]); },
                         {random_tensor({3, 4}, rng, -3, 3)});
  const Tensor labels({3}, std::vector<double>{0, 3, 1});
  expect_gradients_match([&](auto& in) { return ops::cross_entropy(in[0], labels); },
                         {random_tensor({3, 4}, rng, -3, 3)});
}

TEST(OpsGradient, EmbeddingWithRepeatedIds) {
  std::mt19937_64 rng(6);
  const Tensor ids({2, 3}, std::vector<double>{0, 2, 2, 1, 0, 2});
  expect_gradients_match([&](auto& in) { return ops::embedding(in[0], ids); },
                         {random_tensor({4, 3}, rng)});
}

TEST(Ops, SoftmaxIsStableForLargeLogits) {
  Var s = ops::softmax(constant(Tensor({1, 2}, std::vector<double>{1000.0, 1000.0})));
  EXPECT_DOUBLE_EQ(s.value()[0], 0.5);
}

TEST(Ops, CrossEntropyMatchesHandValue) {
  Var logits = constant(Tensor({1, 2}, std::vector<double>{0.0, 0.0}));
  EXPECT_NEAR(ops::cross_entropy(logits, Tensor({1}, 1.0)).value().item(), std::log(2.0), 1e-15);
}

TEST(Ops, MaxOverTimeTiesGoToFirstIndex) {
  Var x = parameter(Tensor({1, 3, 1}, std::vector<double>{2.0, 2.0, 1.0}));
  backward(ops::reshape(ops::max_over_time(x), {1}));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1], 0.0);
}

TEST(Ops, ShapeErrorsThrow) {
  Var a = constant(Tensor({2, 3}));
  EXPECT_THROW(ops::add(a, constant(Tensor({3, 2}))), std::invalid_argument);
  EXPECT_THROW(ops::matmul(a, constant(Tensor({2, 2}))), std::invalid_argument);
  EXPECT_THROW(ops::conv1d_time(constant(Tensor({1, 2, 3})), constant(Tensor({1, 9})),
                                constant(Tensor({1}))),
               std::invalid_argument);
  EXPECT_THROW(ops::embedding(constant(Tensor({2, 2})), Tensor({1}, 5.0)), std::invalid_argument);
}

TEST(Ops, DropoutScalesKeptUnitsAndRoutesGradientThroughMask) {
  std::mt19937_64 rng(0);
  Var x = parameter(Tensor({1, 1000}, 1.0));
  Var y = ops::dropout(x, 0.25, true, rng);
  std::size_t kept = 0;
  for (double v : y.value().values()) {
    ASSERT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15);
    kept += v != 0.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1000.0, 0.75, 0.06);
  backward(weighted_sum(y, Tensor({1, 1000}, 1.0)));
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_EQ(x.grad()[i], y.value()[i]);
  EXPECT_EQ(ops::dropout(x, 0.25, false, rng).value(), x.value());
}

TEST(GradientReversal, ForwardIsExactIdentity) {
  std::mt19937_64 rng(8);
  const Tensor t = random_tensor({3, 4}, rng);
  EXPECT_EQ(ops::gradient_reversal(constant(t), 0.7).value(), t);
}

TEST(GradientReversal, ZeroLambdaAnnihilatesGradient) {
  Var x = parameter(Tensor({2, 2}, 1.0));
  backward(weighted_sum(ops::gradient_reversal(x, 0.0), Tensor({2, 2}, 3.0)));
  const Tensor grad = x.grad();
  for (double g : grad.values()) EXPECT_EQ(g, 0.0);
}

TEST(GradientReversal, MatchesNegativeScalingLayer) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const double lambda = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const Tensor value = random_tensor({4, 5}, rng);
    const Tensor probe = random_tensor({4, 5}, rng);
    Var a = parameter(value), b = parameter(value);
    backward(weighted_sum(ops::relu(ops::gradient_reversal(a, lambda)), probe));
    backward(weighted_sum(ops::relu(b), probe));
    for (std::size_t i = 0; i < value.size(); ++i) {
      EXPECT_NEAR(a.grad()[i], -lambda * b.grad()[i], 1e-9);
    }
  }
}

TEST(GradientReversal, ComposedTwiceScalesByLambdaSquared) {
  const double lambda = 1.7;
  Var x = parameter(Tensor({3}, 0.5));
  Var y = ops::gradient_reversal(ops::gradient_reversal(x, lambda), lambda);
  backward(weighted_sum(y, Tensor({3}, std::vector<double>{1.0, -2.0, 0.5})));
  EXPECT_NEAR(x.grad()[0], lambda * lambda * 1.0, 1e-12);
  EXPECT_NEAR(x.grad()[1], lambda * lambda * -2.0, 1e-12);
}

TEST(GradientReversal, NegativeLambdaRejected) {
  EXPECT_THROW(ops::gradient_reversal(constant(Tensor({1})), -0.1), std::invalid_argument);
}

}  // namespace
}  // namespace fndkit
