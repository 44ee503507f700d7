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

#include <fmt/format.h>

#include "fndkit/error.h"
#include "fndkit/models.h"
#include "fndkit/ops.h"

namespace fndkit {
namespace models {

void check_token_batch(const KeyedBatch& batch, std::size_t max_len) {
  const Tensor& ids = batch.at(keys::kTokenIds);
  if (ids.rank() != 2 || ids.dim(1) != max_len) {
    throw ModelError(fmt::format("token_ids must be [B, {}], got {}", max_len,
                                 shape_string(ids.shape())));
  }
  if (batch.contains(keys::kTokenMask) && batch.at(keys::kTokenMask).shape() != ids.shape()) {
    throw ModelError(fmt::format("token_mask shape {} does not match token_ids {}",
                                 shape_string(batch.at(keys::kTokenMask).shape()),
                                 shape_string(ids.shape())));
  }
}

TextCnn::TextCnn(const ModelParams& params) : AbstractModel("textcnn", params) {
  ParamReader p("textcnn", params);
  const std::size_t vocab = p.size_at_least("vocab_size", 5000, 2);
  const std::size_t embed = p.size_at_least("embed_dim", 32, 1);
  max_len_ = p.size_at_least("max_len", 64, 1);
  const auto filters = p.size_list("filter_sizes", {3, 4, 5});
  const std::size_t channels = p.size_at_least("channels", 32, 1);
  dropout_ = p.number_in("dropout", 0.2, 0.0, 0.99);
  const std::uint64_t seed = p.seed();
  p.finish();
  for (std::size_t k : filters) {
    if (k > max_len_) {
      throw ConfigError(fmt::format("textcnn: filter size {} exceeds max_len {}", k, max_len_));
    }
  }
  set_params(p.effective());

  std::mt19937_64 init(seed);
  embedding_ = layers::Embedding(parameters_, "embedding", vocab, embed, init);
  textcnn_ = layers::TextCnnLayer(parameters_, "textcnn", embed, filters, channels, init);
  classifier_ = layers::Linear(parameters_, "classifier", textcnn_.output_dim(), 2, init);
}

std::vector<std::string> TextCnn::feature_keys() const { return {keys::kTokenIds}; }

ModelOutput TextCnn::forward(const KeyedBatch& batch) {
  check_token_batch(batch, max_len_);
  Var features = textcnn_(embedding_(batch.at(keys::kTokenIds)));
  features = ops::dropout(features, dropout_, training(), rng());
  return {classifier_(features), {}};
}

}  // namespace models

std::unique_ptr<AbstractModel> build_textcnn(const ModelParams& params) {
  return std::make_unique<models::TextCnn>(params);
}

}  // namespace fndkit
