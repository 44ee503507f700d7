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

Eann::Eann(const ModelParams& params) : AbstractModel("eann", params) {
  ParamReader p("eann", params);
  const std::size_t vocab = p.size_at_least("vocab_size", 5000, 2);
  const std::size_t embed = p.size_at_least("embed_dim", 32, 1);
  max_len_ = p.size_at_least("max_len", 64, 1);
  const auto filters = p.size_list("filter_sizes", {1, 2, 3, 4});
  const std::size_t channels = p.size_at_least("channels", 20, 1);
  image_feature_dim_ = p.size_at_least("image_feature_dim", 32, 1);
  const std::size_t hidden = p.size_at_least("hidden_dim", 32, 1);
  num_events_ = p.size_at_least("num_events", 2, 2);
  lambda_ = p.number_in("lambda", 1.0, 0.0, 1e6);
  dropout_ = p.number_in("dropout", 0.2, 0.0, 0.99);
  const std::uint64_t seed = p.seed();
  p.finish();
  for (std::size_t k : filters) {
    if (k > max_len_) {
      throw ConfigError(fmt::format("eann: filter size {} exceeds max_len {}", k, max_len_));
    }
  }
  set_params(p.effective());

  std::mt19937_64 init(seed);
  embedding_ = layers::Embedding(parameters_, "embedding", vocab, embed, init);
  textcnn_ = layers::TextCnnLayer(parameters_, "textcnn", embed, filters, channels, init);
  image_ = layers::Linear(parameters_, "image", image_feature_dim_, hidden, init);
  const std::size_t shared = textcnn_.output_dim() + hidden;
  classifier_ = layers::Linear(parameters_, "classifier", shared, 2, init);
  discriminator_hidden_ = layers::Linear(parameters_, "discriminator.hidden", shared, hidden, init);
  discriminator_out_ =
      layers::Linear(parameters_, "discriminator.out", hidden, num_events_, init);
}

std::vector<std::string> Eann::feature_keys() const {
  return {keys::kTokenIds, keys::kImageFeature};
}

ModelOutput Eann::forward(const KeyedBatch& batch) {
  require_keys(batch, feature_keys());
  check_token_batch(batch, max_len_);
  const Tensor& image = batch.at(keys::kImageFeature);
  if (image.rank() != 2 || image.dim(1) != image_feature_dim_) {
    throw ModelError(fmt::format("image_feature must be [B, {}], got {}", image_feature_dim_,
                                 shape_string(image.shape())));
  }
  Var text = textcnn_(embedding_(batch.at(keys::kTokenIds)));
  Var visual = ops::relu(image_(constant(image)));
  const Var parts[] = {text, visual};
  Var shared = ops::dropout(ops::concat_last(parts), dropout_, training(), rng());

  Var logits = classifier_(shared);
  Var reversed = ops::gradient_reversal(shared, lambda_);
  Var event_logits = discriminator_out_(ops::relu(discriminator_hidden_(reversed)));
  return {logits, {{"event_logits", event_logits}}};
}

LossReport Eann::calculate_loss(const KeyedBatch& batch) {
  const Tensor& events = batch.at(keys::kEvent);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double e = events[i];
    if (!(e >= 0.0) || e >= static_cast<double>(num_events_) || e != std::floor(e)) {
      throw ModelError(fmt::format("event id {} outside [0, {})", e, num_events_));
    }
  }
  ModelOutput out = forward(batch);
  Var classification = ops::cross_entropy(out.logits, batch.at(keys::kLabel));
  // The discriminator minimises its own cross-entropy; the reversal layer
  // turns that into maximisation for the shared extractor.
  Var adversarial = ops::cross_entropy(out.auxiliary.at("event_logits"), events);
  const Var terms[] = {classification, adversarial};
  Var total = ops::sum_scalars(terms);
  return LossReport({{"classification", classification},
                     {"event_adversarial", adversarial},
                     {"total", total}});
}

}  // namespace models

std::unique_ptr<AbstractModel> build_eann(const ModelParams& params) {
  return std::make_unique<models::Eann>(params);
}

}  // namespace fndkit
