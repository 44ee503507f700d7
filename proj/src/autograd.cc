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

#include "fndkit/autograd.h"

#include <stdexcept>
#include <unordered_set>

namespace fndkit {
namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

Tensor Var::grad() const {
  if (node_->grad.empty() && node_->value.size() != 0) return Tensor(shape());
  return node_->grad;
}

Tensor& Var::mutable_grad() {
  if (node_->grad.shape() != node_->value.shape() || node_->grad.size() != node_->value.size()) {
    node_->grad = Tensor(node_->value.shape());
  }
  return node_->grad;
}

void Var::zero_grad() {
  if (!node_->grad.empty()) node_->grad.fill(0.0);
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

namespace detail {

Var make_result(Tensor value, std::vector<Var> parents,
                std::function<void(Node& self)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const Var& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (Var& p : parents) node->parents.push_back(p.node());
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Var(std::move(node));
}

Tensor* grad_of(Node& node) {
  if (!node.requires_grad) return nullptr;
  if (node.grad.shape() != node.value.shape() || node.grad.size() != node.value.size()) {
    node.grad = Tensor(node.value.shape());
  }
  return &node.grad;
}

}  // namespace detail

void backward(const Var& root) {
  if (!root.defined()) throw std::invalid_argument("backward on undefined Var");
  if (root.value().size() != 1) {
    throw std::invalid_argument("backward root must hold exactly one value, got shape " +
                                shape_string(root.shape()));
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (!node->parents.empty()) node->grad = Tensor(node->value.shape());
  }
  for (double& g : detail::grad_of(*root.node())->values()) g += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
}

}  // namespace fndkit
