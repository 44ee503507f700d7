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

#include <fmt/format.h>

#include "fndkit/error.h"
#include "fndkit/models.h"
#include "fndkit/ops.h"

namespace fndkit {
namespace models {

namespace {

std::size_t index_value(double v, std::size_t limit, const char* what, std::size_t graph) {
  if (!(v >= 0.0) || v >= static_cast<double>(limit) || v != std::floor(v)) {
    throw ModelError(fmt::format("graph {}: {} {} outside node range [0, {})", graph, what, v,
                                 limit));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

BiGcnLite::BiGcnLite(const ModelParams& params) : AbstractModel("bigcn", params) {
  ParamReader p("bigcn", params);
  feature_dim_ = p.size_at_least("feature_dim", 16, 1);
  const std::size_t hidden = p.size_at_least("hidden_dim", 32, 1);
  const std::uint64_t seed = p.seed();
  p.finish();
  set_params(p.effective());

  std::mt19937_64 init(seed);
  auto weight = [&](const std::string& name, std::size_t in, std::size_t out) {
    return parameters_.add(name, layers::uniform_fan_in({in, out}, in, init));
  };
  td_weight1_ = weight("top_down.gcn1.weight", feature_dim_, hidden);
  td_weight2_ = weight("top_down.gcn2.weight", hidden, hidden);
  bu_weight1_ = weight("bottom_up.gcn1.weight", feature_dim_, hidden);
  bu_weight2_ = weight("bottom_up.gcn2.weight", hidden, hidden);
  classifier_ = layers::Linear(parameters_, "classifier", 2 * hidden, 2, init);
}

std::vector<std::string> BiGcnLite::feature_keys() const {
  return {keys::kNodeFeatures, keys::kNodeMask, keys::kEdges, keys::kEdgeCount, keys::kRoot};
}

BiGcnLite::Adjacency BiGcnLite::propagation_adjacency(const KeyedBatch& batch) {
  const Tensor& mask = batch.at(keys::kNodeMask);
  const Tensor& edges = batch.at(keys::kEdges);
  const Tensor& edge_count = batch.at(keys::kEdgeCount);
  const Tensor& root = batch.at(keys::kRoot);
  const std::size_t b = batch.batch_size();
  if (mask.rank() != 2) throw ModelError("node_mask must be [B, N]");
  if (edges.rank() != 3 || edges.dim(2) != 2) {
    throw ModelError("edges must be [B, E, 2], got " + shape_string(edges.shape()));
  }
  if (edge_count.size() != b || root.size() != b) {
    throw ModelError("edge_count and root need one entry per graph");
  }
  const std::size_t n = mask.dim(1);
  const std::size_t e_max = edges.dim(1);

  Adjacency out{Tensor({b, n, n}), Tensor()};
  for (std::size_t g = 0; g < b; ++g) {
    std::size_t nodes = 0;
    while (nodes < n && mask[g * n + nodes] != 0.0) ++nodes;
    if (nodes == 0) throw ModelError(fmt::format("graph {} has no nodes", g));
    index_value(root[g], nodes, "root", g);
    const std::size_t count = index_value(edge_count[g], e_max + 1, "edge count", g);

    // Parent->child (top-down) and child->parent (bottom-up) edges share one
    // undirected support; symmetrizing either gives the same matrix.
    Tensor a({nodes, nodes});
    for (std::size_t e = 0; e < count; ++e) {
      const std::size_t u = index_value(edges[(g * e_max + e) * 2], nodes, "edge endpoint", g);
      const std::size_t v =
          index_value(edges[(g * e_max + e) * 2 + 1], nodes, "edge endpoint", g);
      if (u == v) throw ModelError(fmt::format("graph {}: self-loop on node {}", g, u));
      a[u * nodes + v] = 1.0;
      a[v * nodes + u] = 1.0;
    }
    const Tensor a_hat = layers::normalized_adjacency(a);
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t j = 0; j < nodes; ++j) {
        out.top_down[(g * n + i) * n + j] = a_hat[i * nodes + j];
      }
    }
  }
  out.bottom_up = out.top_down;
  return out;
}

ModelOutput BiGcnLite::forward(const KeyedBatch& batch) {
  require_keys(batch, feature_keys());
  const Tensor& x = batch.at(keys::kNodeFeatures);
  if (x.rank() != 3 || x.dim(2) != feature_dim_) {
    throw ModelError(fmt::format("node_features must be [B, N, {}], got {}", feature_dim_,
                                 shape_string(x.shape())));
  }
  const Tensor& mask = batch.at(keys::kNodeMask);
  if (mask.rank() != 2 || mask.dim(1) != x.dim(1)) {
    throw ModelError("node_mask does not match node_features");
  }
  const Adjacency adj = propagation_adjacency(batch);
  Var features = constant(x);

  auto branch = [&](const Tensor& a_hat, const Var& w1, const Var& w2) {
    Var h = layers::gcn_layer_normalized(features, a_hat, w1, layers::Activation::kRelu);
    h = layers::gcn_layer_normalized(h, a_hat, w2, layers::Activation::kRelu);
    return ops::masked_mean_over_time(h, mask);
  };
  const Var parts[] = {branch(adj.top_down, td_weight1_, td_weight2_),
                       branch(adj.bottom_up, bu_weight1_, bu_weight2_)};
  return {classifier_(ops::concat_last(parts)), {}};
}

}  // namespace models

std::unique_ptr<AbstractModel> build_bigcn_lite(const ModelParams& params) {
  return std::make_unique<models::BiGcnLite>(params);
}

}  // namespace fndkit
