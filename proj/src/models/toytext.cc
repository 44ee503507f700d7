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

#include "fndkit/models.h"
#include "fndkit/ops.h"

namespace fndkit {
namespace models {

ToyText::ToyText(const ModelParams& params) : AbstractModel("toytext", params) {
  ParamReader p("toytext", params);
  const std::size_t vocab = p.size_at_least("vocab_size", 5000, 2);
  const std::size_t embed = p.size_at_least("embed_dim", 32, 1);
  max_len_ = p.size_at_least("max_len", 64, 1);
  const std::uint64_t seed = p.seed();
  p.finish();
  set_params(p.effective());

  std::mt19937_64 init(seed);
  embedding_ = layers::Embedding(parameters_, "embedding", vocab, embed, init);
  classifier_ = layers::Linear(parameters_, "classifier", embed, 2, init);
}

std::vector<std::string> ToyText::feature_keys() const {
  return {keys::kTokenIds, keys::kTokenMask};
}

ModelOutput ToyText::forward(const KeyedBatch& batch) {
  require_keys(batch, feature_keys());
  check_token_batch(batch, max_len_);
  Var pooled = ops::masked_mean_over_time(embedding_(batch.at(keys::kTokenIds)),
                                          batch.at(keys::kTokenMask));
  return {classifier_(pooled), {}};
}

}  // namespace models

std::unique_ptr<AbstractModel> build_toy_text_model(const ModelParams& params) {
  return std::make_unique<models::ToyText>(params);
}

}  // namespace fndkit
