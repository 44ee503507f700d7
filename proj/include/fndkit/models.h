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

#include <memory>
#include <vector>

#include "fndkit/layers.h"
#include "fndkit/model.h"

// Built-in detectors. Each accepts a parameter mapping (unknown keys are
// rejected, omitted keys take the defaults listed per class) and registers
// under a lowercase name: "textcnn", "mdfend", "eann", "bigcn", "toytext".
namespace fndkit {

void register_builtin_models(ModelRegistry& registry);

std::unique_ptr<AbstractModel> build_textcnn(const ModelParams& params);
std::unique_ptr<AbstractModel> build_mdfend(const ModelParams& params);
std::unique_ptr<AbstractModel> build_eann(const ModelParams& params);
std::unique_ptr<AbstractModel> build_bigcn_lite(const ModelParams& params);
std::unique_ptr<AbstractModel> build_toy_text_model(const ModelParams& params);

namespace models {

// Checks token_ids/token_mask exist and have length `max_len`.
void check_token_batch(const KeyedBatch& batch, std::size_t max_len);

// embedding -> text CNN -> dropout -> affine -> 2 logits.
// vocab_size 5000, embed_dim 32, max_len 64, filter_sizes [3,4,5],
// channels 32, dropout 0.2, seed 0.
class TextCnn : public AbstractModel {
 public:
  explicit TextCnn(const ModelParams& params);

  std::vector<std::string> feature_keys() const override;
  ModelOutput forward(const KeyedBatch& batch) override;

  std::size_t max_len() const { return max_len_; }

 private:
  std::size_t max_len_ = 0;
  double dropout_ = 0.0;
  layers::Embedding embedding_;
  layers::TextCnnLayer textcnn_;
  layers::Linear classifier_;
};

// Multi-domain mixture of text-CNN experts. A softmax gate over
// [domain embedding ; mean-pooled token embedding] weights the experts.
// Batches need "domain". forward() exposes the gate as auxiliary "gate".
// vocab_size 5000, embed_dim 32, max_len 170, num_experts 5, num_domains 9,
// filter_sizes [1,2,3,5,10], channels 16, domain_embed_dim 16,
// dropout 0.2, seed 0.
class Mdfend : public AbstractModel {
 public:
  explicit Mdfend(const ModelParams& params);

  std::vector<std::string> feature_keys() const override;
  ModelOutput forward(const KeyedBatch& batch) override;

  std::size_t num_experts() const { return experts_.size(); }
  std::size_t num_domains() const { return num_domains_; }

 private:
  std::size_t max_len_ = 0;
  std::size_t num_domains_ = 0;
  double dropout_ = 0.0;
  layers::Embedding embedding_;
  std::vector<layers::TextCnnLayer> experts_;
  layers::Embedding domain_embedding_;
  layers::Linear gate_;
  layers::Linear classifier_;
};

// Event-adversarial multimodal detector: text CNN branch plus an affine
// image branch over a precomputed "image_feature" vector form the shared
// representation; a fake-news head and an event discriminator (behind
// gradient reversal) are trained jointly. Auxiliary output "event_logits".
// vocab_size 5000, embed_dim 32, max_len 64, filter_sizes [1,2,3,4],
// channels 20, image_feature_dim 32, hidden_dim 32, num_events 2,
// lambda 1.0, dropout 0.2, seed 0.
class Eann : public AbstractModel {
 public:
  explicit Eann(const ModelParams& params);

  std::vector<std::string> feature_keys() const override;
  ModelOutput forward(const KeyedBatch& batch) override;
  // {classification, event_adversarial, total}
  LossReport calculate_loss(const KeyedBatch& batch) override;

  double lambda() const { return lambda_; }
  std::size_t num_events() const { return num_events_; }

 private:
  std::size_t max_len_ = 0;
  std::size_t image_feature_dim_ = 0;
  std::size_t num_events_ = 0;
  double lambda_ = 1.0;
  double dropout_ = 0.0;
  layers::Embedding embedding_;
  layers::TextCnnLayer textcnn_;
  layers::Linear image_;
  layers::Linear classifier_;
  layers::Linear discriminator_hidden_;
  layers::Linear discriminator_out_;
};

// Bi-directional propagation-tree GCN: one two-layer GCN stack over the
// top-down tree and one over the bottom-up tree, mean-pooled over real
// nodes, concatenated, affine -> 2 logits.
// feature_dim 16, hidden_dim 32, seed 0.
class BiGcnLite : public AbstractModel {
 public:
  explicit BiGcnLite(const ModelParams& params);

  std::vector<std::string> feature_keys() const override;
  ModelOutput forward(const KeyedBatch& batch) override;

  // Normalized symmetric adjacencies [B, N, N] for both orientations, after
  // validating edges and roots against each graph's node count.
  struct Adjacency {
    Tensor top_down;
    Tensor bottom_up;
  };
  static Adjacency propagation_adjacency(const KeyedBatch& batch);

 private:
  std::size_t feature_dim_ = 0;
  Var td_weight1_, td_weight2_, bu_weight1_, bu_weight2_;
  layers::Linear classifier_;
};

// Minimal extension example: embedding -> mean over tokens -> affine.
// vocab_size 5000, embed_dim 32, max_len 64, seed 0.
class ToyText : public AbstractModel {
 public:
  explicit ToyText(const ModelParams& params);

  std::vector<std::string> feature_keys() const override;
  ModelOutput forward(const KeyedBatch& batch) override;

 private:
  std::size_t max_len_ = 0;
  layers::Embedding embedding_;
  layers::Linear classifier_;
};

}  // namespace models
}  // namespace fndkit
