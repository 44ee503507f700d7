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

Mdfend::Mdfend(const ModelParams& params) : AbstractModel("mdfend", params) {
  ParamReader p("mdfend", params);
  const std::size_t vocab = p.size_at_least("vocab_size", 5000, 2);
  const std::size_t embed = p.size_at_least("embed_dim", 32, 1);
  max_len_ = p.size_at_least("max_len", 170, 1);
  const std::size_t experts = p.size_at_least("num_experts", 5, 1);
  num_domains_ = p.size_at_least("num_domains", 9, 1);
  const auto filters = p.size_list("filter_sizes", {1, 2, 3, 5, 10});
  const std::size_t channels = p.size_at_least("channels", 16, 1);
  const std::size_t domain_dim = p.size_at_least("domain_embed_dim", 16, 1);
  dropout_ = p.number_in("dropout", 0.2, 0.0, 0.99);
  const std::uint64_t seed = p.seed();
  p.finish();
  for (std::size_t k : filters) {
    if (k > max_len_) {
      throw ConfigError(fmt::format("mdfend: filter size {} exceeds max_len {}", k, max_len_));
    }
  }
  set_params(p.effective());

  std::mt19937_64 init(seed);
  embedding_ = layers::Embedding(parameters_, "embedding", vocab, embed, init);
  for (std::size_t e = 0; e < experts; ++e) {
    experts_.emplace_back(parameters_, fmt::format("expert{}", e), embed, filters, channels, init);
  }
  domain_embedding_ =
      layers::Embedding(parameters_, "domain_embedding", num_domains_, domain_dim, init);
  gate_ = layers::Linear(parameters_, "gate", domain_dim + embed, experts, init);
  classifier_ = layers::Linear(parameters_, "classifier", experts_[0].output_dim(), 2, init);
}

std::vector<std::string> Mdfend::feature_keys() const {
  return {keys::kTokenIds, keys::kTokenMask, keys::kDomain};
}

ModelOutput Mdfend::forward(const KeyedBatch& batch) {
  require_keys(batch, feature_keys());
  check_token_batch(batch, max_len_);
  const Tensor& domain = batch.at(keys::kDomain);
  if (domain.size() != batch.batch_size()) {
    throw ModelError(fmt::format("domain must hold one id per sample, got shape {}",
                                 shape_string(domain.shape())));
  }
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const double d = domain[i];
    if (!(d >= 0.0) || d >= static_cast<double>(num_domains_) || d != std::floor(d)) {
      throw ModelError(fmt::format("domain id {} outside [0, {})", d, num_domains_));
    }
  }
  const std::size_t b = batch.batch_size();

  Var embedded = embedding_(batch.at(keys::kTokenIds));
  Var text_summary = ops::masked_mean_over_time(embedded, batch.at(keys::kTokenMask));
  Var domain_vec = ops::embedding(domain_embedding_.weight(), domain.reshaped({b}));
  const Var gate_in[] = {domain_vec, text_summary};
  Var gate = ops::softmax(gate_(ops::concat_last(gate_in)));  // [B, E]

  std::vector<Var> expert_out;
  expert_out.reserve(experts_.size());
  for (const auto& expert : experts_) expert_out.push_back(expert(embedded));
  Var stacked = ops::stack_middle(expert_out);  // [B, E, F]
  const std::size_t f = experts_[0].output_dim();
  Var fused = ops::bmm(ops::reshape(gate, {b, 1, experts_.size()}), stacked);
  fused = ops::dropout(ops::reshape(fused, {b, f}), dropout_, training(), rng());
  return {classifier_(fused), {{"gate", gate}}};
}

}  // namespace models

std::unique_ptr<AbstractModel> build_mdfend(const ModelParams& params) {
  return std::make_unique<models::Mdfend>(params);
}

}  // namespace fndkit
