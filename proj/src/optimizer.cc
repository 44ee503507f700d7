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

#include "fndkit/optimizer.h"

#include <cmath>

#include <fmt/format.h>

#include "fndkit/error.h"
#include "fndkit/model.h"

namespace fndkit {

Sgd::Sgd(ParameterList& params, const OptimizerSpec& spec)
    : Optimizer(params, spec.learning_rate),
      momentum_(spec.momentum),
      weight_decay_(spec.weight_decay) {
  for (const auto& entry : params_) velocity_.emplace_back(entry.second.shape());
}

void Sgd::step() {
  std::size_t i = 0;
  for (auto& [name, var] : params_) {
    const Tensor& g = var.mutable_grad();
    Tensor& w = var.mutable_value();
    Tensor& vel = velocity_[i++];
    for (std::size_t j = 0; j < w.size(); ++j) {
      double d = g[j] + weight_decay_ * w[j];
      if (momentum_ != 0.0) {
        vel[j] = momentum_ * vel[j] + d;
        d = vel[j];
      }
      w[j] -= learning_rate_ * d;
    }
  }
}

Adam::Adam(ParameterList& params, const OptimizerSpec& spec)
    : Optimizer(params, spec.learning_rate), spec_(spec) {
  for (const auto& entry : params_) {
    m_.emplace_back(entry.second.shape());
    v_.emplace_back(entry.second.shape());
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
  std::size_t i = 0;
  for (auto& [name, var] : params_) {
    const Tensor& g = var.mutable_grad();
    Tensor& w = var.mutable_value();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    ++i;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double d = g[j] + spec_.weight_decay * w[j];
      m[j] = spec_.beta1 * m[j] + (1.0 - spec_.beta1) * d;
      v[j] = spec_.beta2 * v[j] + (1.0 - spec_.beta2) * d * d;
      w[j] -= learning_rate_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + spec_.eps);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(ParameterList& params, const OptimizerSpec& spec) {
  if (!(spec.learning_rate > 0.0) || !std::isfinite(spec.learning_rate)) {
    throw ConfigError(fmt::format("learning rate must be positive, got {}", spec.learning_rate));
  }
  if (spec.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  const std::string name = to_lower(spec.name);
  if (name == "adam") {
    if (!(spec.beta1 >= 0.0 && spec.beta1 < 1.0 && spec.beta2 >= 0.0 && spec.beta2 < 1.0)) {
      throw ConfigError("adam betas must lie in [0, 1)");
    }
    return std::make_unique<Adam>(params, spec);
  }
  if (name == "sgd") {
    if (spec.momentum < 0.0) throw ConfigError("sgd momentum must be >= 0");
    return std::make_unique<Sgd>(params, spec);
  }
  throw ConfigError(fmt::format("unknown optimizer '{}'; expected adam or sgd", spec.name));
}

}  // namespace fndkit
