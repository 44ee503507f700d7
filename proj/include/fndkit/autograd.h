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

#include <functional>
#include <memory>
#include <vector>

#include "fndkit/tensor.h"

namespace fndkit {

// One vertex of the dynamically recorded computation graph.
struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `self.grad` and accumulates into the parents' grads.
  std::function<void(Node& self)> backward_fn;
};

// Handle to a graph node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }

  // Gradient accumulated by backward(); zeros when nothing has flowed in.
  Tensor grad() const;
  // Allocates a zero buffer on first use.
  Tensor& mutable_grad();
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Tensor value);
Var parameter(Tensor value);

// Reverse-mode sweep from a one-element root. Parameter grads accumulate
// across calls until zeroed; intermediate grads are reset on every call.
void backward(const Var& root);

// While alive, ops record no parents and produce constants.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

// Builds the result node of an op. `backward_fn` is dropped when no parent
// requires a gradient or grad recording is disabled.
Var make_result(Tensor value, std::vector<Var> parents,
                std::function<void(Node& self)> backward_fn);

// Gradient buffer of `node`, or nullptr if it does not take gradients.
Tensor* grad_of(Node& node);

}  // namespace detail

}  // namespace fndkit
