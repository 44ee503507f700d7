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
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndkit/autograd.h"
#include "fndkit/dataset.h"
#include "fndkit/parameters.h"

namespace fndkit {

using ModelParams = nlohmann::json;

// One or more named scalar losses plus the scalar that gets back-propagated.
// A single entry is its own total; otherwise an entry named "total" wins,
// else the entries are summed.
class LossReport {
 public:
  LossReport() = default;
  explicit LossReport(Var loss, std::string name = "loss");
  explicit LossReport(std::vector<std::pair<std::string, Var>> entries);

  const Var& total() const { return total_; }
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  // Plain values of every entry, in insertion order.
  std::vector<std::pair<std::string, double>> values() const;
  double value(std::string_view name) const;

 private:
  std::vector<std::pair<std::string, Var>> entries_;
  Var total_;
};

// What forward() hands back: class logits plus any named side outputs
// (gate weights, discriminator logits) that the loss may need.
struct ModelOutput {
  Var logits;
  std::map<std::string, Var, std::less<>> auxiliary;
};

// Contract every detector satisfies. calculate_loss and predict both route
// through forward; predict returns row-stochastic probabilities [B, C].
class AbstractModel {
 public:
  AbstractModel(std::string name, ModelParams params);
  virtual ~AbstractModel() = default;
  AbstractModel(const AbstractModel&) = delete;
  AbstractModel& operator=(const AbstractModel&) = delete;

  const std::string& name() const { return name_; }
  const ModelParams& params() const { return params_; }

  // Batch keys forward() reads. "label" is not among them.
  virtual std::vector<std::string> feature_keys() const = 0;

  virtual ModelOutput forward(const KeyedBatch& batch) = 0;
  virtual LossReport calculate_loss(const KeyedBatch& batch);
  virtual Tensor predict(const KeyedBatch& batch);

  ParameterList& parameters() { return parameters_; }
  const ParameterList& parameters() const { return parameters_; }

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  // Placement hook; only "cpu" does real work on this substrate, other tags
  // are recorded and otherwise ignored.
  void to(std::string device) { device_ = std::move(device); }
  const std::string& device() const { return device_; }

 protected:
  // Throws ModelError naming the first key of `required` absent from batch.
  static void require_keys(const KeyedBatch& batch, std::span<const std::string> required);
  std::mt19937_64& rng() { return rng_; }
  // Replaces the stored construction parameters, typically with the
  // defaults-filled mapping produced by ParamReader::effective().
  void set_params(ModelParams params) { params_ = std::move(params); }

  ParameterList parameters_;

 private:
  std::string name_;
  ModelParams params_;
  bool training_ = true;
  std::string device_ = "cpu";
  std::mt19937_64 rng_;
};

using ModelFactory = std::function<std::unique_ptr<AbstractModel>(const ModelParams&)>;

// How `run` should turn JSON records into batches for a model.
enum class InputKind { kText, kGraph };

struct ModelSpec {
  ModelFactory factory;
  // Record fields that must be present in every JSON element.
  std::set<std::string> required_fields;
  InputKind input = InputKind::kText;
};

// Case-insensitive name -> factory table. global() comes pre-populated with
// the built-in zoo.
class ModelRegistry {
 public:
  static ModelRegistry& global();

  // Throws ConfigError on duplicates.
  void register_model(std::string name, ModelSpec spec);
  bool contains(std::string_view name) const;
  const ModelSpec& spec(std::string_view name) const;
  std::vector<std::string> names() const;

  // Throws ConfigError on an unknown name (listing registered ones) or on
  // parameters the factory rejects.
  std::unique_ptr<AbstractModel> create(std::string_view name, const ModelParams& params) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ModelSpec> specs_;
};

std::unique_ptr<AbstractModel> resolve_model(std::string_view name, const ModelParams& params);

std::string to_lower(std::string_view s);

// Typed, strict reader over a parameter object: every key must be consumed
// by exactly one getter before finish(), otherwise ConfigError.
class ParamReader {
 public:
  ParamReader(std::string model, const ModelParams& params);

  std::size_t size_at_least(const char* key, std::size_t fallback, std::size_t minimum);
  double number_in(const char* key, double fallback, double low, double high);
  std::vector<std::size_t> size_list(const char* key, std::vector<std::size_t> fallback);
  std::uint64_t seed(const char* key = "seed");
  // Marks a key as known without reading it.
  void allow(const char* key);
  void finish() const;

  // Every key read so far with the value actually used (defaults included).
  const ModelParams& effective() const { return effective_; }

 private:
  const nlohmann::json* lookup(const char* key);

  std::string model_;
  const ModelParams& params_;
  std::set<std::string> consumed_;
  ModelParams effective_ = ModelParams::object();
};

}  // namespace fndkit
