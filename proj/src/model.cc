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

#include "fndkit/model.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fndkit/error.h"
#include "fndkit/models.h"
#include "fndkit/ops.h"

namespace fndkit {

LossReport::LossReport(Var loss, std::string name) {
  entries_.emplace_back(std::move(name), loss);
  total_ = std::move(loss);
}

LossReport::LossReport(std::vector<std::pair<std::string, Var>> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("LossReport needs at least one loss");
  if (entries_.size() == 1) {
    total_ = entries_[0].second;
    return;
  }
  for (const auto& [name, v] : entries_) {
    if (name == "total") {
      total_ = v;
      return;
    }
  }
  std::vector<Var> terms;
  for (const auto& entry : entries_) terms.push_back(entry.second);
  total_ = ops::sum_scalars(terms);
}

std::vector<std::pair<std::string, double>> LossReport::values() const {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, v] : entries_) out.emplace_back(name, v.value().item());
  return out;
}

double LossReport::value(std::string_view name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v.value().item();
  }
  throw std::out_of_range(fmt::format("no loss named '{}'", name));
}

AbstractModel::AbstractModel(std::string name, ModelParams params)
    : name_(std::move(name)), params_(std::move(params)) {
  std::uint64_t seed = 0;
  if (params_.is_object() && params_.contains("seed") && params_["seed"].is_number_integer() &&
      params_["seed"].get<long long>() >= 0) {
    seed = params_["seed"].get<std::uint64_t>();
  }
  // Dropout draws from a stream distinct from the initialisation stream.
  rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
}

LossReport AbstractModel::calculate_loss(const KeyedBatch& batch) {
  ModelOutput out = forward(batch);
  return LossReport(ops::cross_entropy(out.logits, batch.at(keys::kLabel)));
}

Tensor AbstractModel::predict(const KeyedBatch& batch) {
  NoGradGuard no_grad;
  ModelOutput out = forward(batch);
  return ops::softmax(out.logits).value();
}

void AbstractModel::require_keys(const KeyedBatch& batch, std::span<const std::string> required) {
  for (const std::string& key : required) {
    if (!batch.contains(key)) {
      throw ModelError(fmt::format("batch is missing feature key '{}'", key));
    }
  }
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

ModelRegistry& ModelRegistry::global() {
  static ModelRegistry* registry = [] {
    auto* r = new ModelRegistry();
    register_builtin_models(*r);
    return r;
  }();
  return *registry;
}

void ModelRegistry::register_model(std::string name, ModelSpec spec) {
  std::lock_guard lock(mutex_);
  std::string key = to_lower(name);
  if (key.empty()) throw ConfigError("model name must not be empty");
  if (!spec.factory) throw ConfigError(fmt::format("model '{}' registered without factory", key));
  if (specs_.contains(key)) {
    throw ConfigError(fmt::format("model '{}' is already registered", key));
  }
  specs_.emplace(std::move(key), std::move(spec));
}

bool ModelRegistry::contains(std::string_view name) const {
  std::lock_guard lock(mutex_);
  return specs_.contains(to_lower(name));
}

const ModelSpec& ModelRegistry::spec(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = specs_.find(to_lower(name));
  if (it == specs_.end()) {
    std::vector<std::string> known;
    for (const auto& entry : specs_) known.push_back(entry.first);
    throw ConfigError(fmt::format("unknown model '{}'; registered models: {}", name,
                                  fmt::join(known, ", ")));
  }
  return it->second;
}

std::vector<std::string> ModelRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& entry : specs_) out.push_back(entry.first);
  return out;
}

std::unique_ptr<AbstractModel> ModelRegistry::create(std::string_view name,
                                                     const ModelParams& params) const {
  const ModelSpec& s = spec(name);
  if (!params.is_null() && !params.is_object()) {
    throw ConfigError(fmt::format("parameters for '{}' must be a mapping", name));
  }
  try {
    return s.factory(params.is_null() ? ModelParams::object() : params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("invalid parameters for '{}': {}", name, e.what()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid parameters for '{}': {}", name, e.what()));
  }
}

std::unique_ptr<AbstractModel> resolve_model(std::string_view name, const ModelParams& params) {
  return ModelRegistry::global().create(name, params);
}

ParamReader::ParamReader(std::string model, const ModelParams& params)
    : model_(std::move(model)), params_(params) {}

const nlohmann::json* ParamReader::lookup(const char* key) {
  consumed_.insert(key);
  if (!params_.is_object() || !params_.contains(key)) return nullptr;
  return &params_.at(key);
}

std::size_t ParamReader::size_at_least(const char* key, std::size_t fallback,
                                       std::size_t minimum) {
  const nlohmann::json* v = lookup(key);
  std::size_t value = fallback;
  if (v != nullptr) {
    if (!v->is_number_integer() || v->get<long long>() < static_cast<long long>(minimum)) {
      throw ConfigError(fmt::format("{}: '{}' must be an integer >= {}, got {}", model_, key,
                                    minimum, v->dump()));
    }
    value = v->get<std::size_t>();
  }
  effective_[key] = value;
  return value;
}

double ParamReader::number_in(const char* key, double fallback, double low, double high) {
  const nlohmann::json* v = lookup(key);
  double value = fallback;
  if (v != nullptr) {
    if (!v->is_number() || !(v->get<double>() >= low) || !(v->get<double>() <= high)) {
      throw ConfigError(fmt::format("{}: '{}' must be a number in [{}, {}], got {}", model_,
                                    key, low, high, v->dump()));
    }
    value = v->get<double>();
  }
  effective_[key] = value;
  return value;
}

std::vector<std::size_t> ParamReader::size_list(const char* key,
                                                std::vector<std::size_t> fallback) {
  const nlohmann::json* v = lookup(key);
  if (v == nullptr) {
    effective_[key] = fallback;
    return fallback;
  }
  std::vector<std::size_t> out;
  if (v->is_array() && !v->empty()) {
    for (const auto& item : *v) {
      if (!item.is_number_integer() || item.get<long long>() < 1) {
        out.clear();
        break;
      }
      out.push_back(item.get<std::size_t>());
    }
  }
  if (out.empty()) {
    throw ConfigError(fmt::format("{}: '{}' must be a non-empty list of positive integers, got {}",
                                  model_, key, v->dump()));
  }
  effective_[key] = out;
  return out;
}

std::uint64_t ParamReader::seed(const char* key) {
  const nlohmann::json* v = lookup(key);
  std::uint64_t value = 0;
  if (v != nullptr) {
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      throw ConfigError(fmt::format("{}: '{}' must be a non-negative integer", model_, key));
    }
    value = v->get<std::uint64_t>();
  }
  effective_[key] = value;
  return value;
}

void ParamReader::allow(const char* key) {
  if (const nlohmann::json* v = lookup(key)) effective_[key] = *v;
}

void ParamReader::finish() const {
  if (!params_.is_object()) return;
  std::vector<std::string> unknown;
  for (const auto& item : params_.items()) {
    if (!consumed_.contains(item.key())) unknown.push_back(item.key());
  }
  if (!unknown.empty()) {
    throw ConfigError(fmt::format("{}: unknown parameter(s) {}; accepted: {}", model_,
                                  fmt::join(unknown, ", "), fmt::join(consumed_, ", ")));
  }
}

}  // namespace fndkit
