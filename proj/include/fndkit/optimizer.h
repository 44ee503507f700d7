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
#include <string>
#include <vector>

#include "fndkit/parameters.h"

namespace fndkit {

struct OptimizerSpec {
  std::string name = "adam";  // "adam" or "sgd"
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double momentum = 0.0;  // sgd only
};

class Optimizer {
 public:
  explicit Optimizer(ParameterList& params, double learning_rate)
      : params_(params), learning_rate_(learning_rate) {}
  virtual ~Optimizer() = default;

  // Applies one update from the gradients currently held by the parameters.
  virtual void step() = 0;
  void zero_grad() { params_.zero_grad(); }

  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double lr) { learning_rate_ = lr; }

 protected:
  ParameterList& params_;
  double learning_rate_;
};

class Sgd : public Optimizer {
 public:
  Sgd(ParameterList& params, const OptimizerSpec& spec);
  void step() override;

 private:
  double momentum_;
  double weight_decay_;
  std::vector<Tensor> velocity_;
};

// Adam with bias correction; weight_decay is added to the gradient (L2).
class Adam : public Optimizer {
 public:
  Adam(ParameterList& params, const OptimizerSpec& spec);
  void step() override;

 private:
  OptimizerSpec spec_;
  long long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Throws ConfigError for an unknown name or out-of-range hyperparameters.
std::unique_ptr<Optimizer> make_optimizer(ParameterList& params, const OptimizerSpec& spec);

}  // namespace fndkit
