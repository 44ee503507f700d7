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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndkit/dataset.h"
#include "fndkit/model.h"

namespace fndkit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double low = -1.0, double high = 1.0);

// Label 1 iff the token "w0" occurs; other tokens drawn from w1..w{vocab-1}.
nlohmann::json trigger_corpus(std::size_t n, std::size_t vocab, std::uint64_t seed);

// Label 1 iff the sample's own domain trigger ("t<d>") occurs. Negatives
// often carry another domain's trigger, so the domain must be used.
nlohmann::json multidomain_corpus(std::size_t n, std::size_t domains, std::uint64_t seed);

// Trigger text plus an "image_feature" vector and an "event" id; one token
// ("e<event>") reveals the event.
nlohmann::json eann_corpus(std::size_t n, std::size_t feature_dim, std::size_t events,
                           std::uint64_t seed);

// Random propagation trees; label 1 iff the root's first feature is positive.
nlohmann::json graph_corpus(std::size_t n, std::size_t feature_dim, std::uint64_t seed);

// Runs records through the standard text pipeline (vocabulary built from the
// records themselves) and returns unshuffled batches.
std::vector<KeyedBatch> text_batches(const nlohmann::json& records, std::size_t max_len,
                                     std::size_t batch_size, std::size_t vocab_size = 5000);
std::vector<KeyedBatch> graph_batches(const nlohmann::json& records, std::size_t batch_size);

// Central-difference derivative of `loss` with respect to one parameter
// entry; the entry is restored afterwards.
double numeric_gradient(Var& param, std::size_t index, const std::function<double()>& loss,
                        double eps = 1e-6);

struct GradientCheck {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

// Compares backward() against central differences at `samples` randomly
// chosen parameter entries. The model is put in evaluation mode so dropout
// does not perturb the loss. Relative error is |a - n| / max(|a|, |n|),
// taken as 0 when both are below `floor`.
// Scalar whose derivative the backward pass of `total` should equal for the
// named parameter. The default is the total itself.
using GradientObjective = std::function<double(const LossReport&, std::string_view parameter)>;

std::vector<GradientCheck> check_model_gradients(AbstractModel& model, const KeyedBatch& batch,
                                                 std::size_t samples, std::uint64_t seed,
                                                 double floor = 1e-7,
                                                 GradientObjective objective = {});

// For EANN: parameters behind the gradient reversal see
// classification - lambda * event_adversarial; the discriminator sees the total.
GradientObjective adversarial_objective(double lambda);

}  // namespace fndkit::testing
