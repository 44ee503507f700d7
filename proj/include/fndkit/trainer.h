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
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fndkit/dataset.h"
#include "fndkit/metrics.h"
#include "fndkit/model.h"
#include "fndkit/optimizer.h"

namespace fndkit {

// (epoch, rate in effect during that epoch) -> rate for the next epoch.
using LrScheduler = std::function<double(int epoch, double learning_rate)>;

// Turns concatenated predictions into metrics. The default computes the
// configured metric names with classification_metrics.
using Evaluator = std::function<MetricReport(const Tensor& probs, std::span<const int> labels)>;

// Batches to train on in a given 1-based epoch; lets callers reshuffle.
using BatchProvider = std::function<std::vector<KeyedBatch>(int epoch)>;

struct EarlyStoppingConfig {
  std::size_t patience = 5;
  std::string metric = "accuracy";  // maximized
};

struct TrainerConfig {
  int epochs = 20;
  OptimizerSpec optimizer;
  std::optional<double> clip_max_norm;
  LrScheduler scheduler;
  std::optional<EarlyStoppingConfig> early_stopping;
  std::string device = "cpu";
  std::uint64_t seed = 0;
  // Empty: nothing is written to disk and the best model is kept in memory.
  std::filesystem::path output_dir;
  std::vector<std::string> metrics{"accuracy", "precision", "recall", "f1"};
  bool keep_epoch_checkpoints = true;
  bool log_to_console = true;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  std::vector<std::pair<std::string, double>> train_losses;
  std::optional<MetricReport> val_metrics;
  double learning_rate = 0.0;
};

struct EarlyStopperState {
  double best_value = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::size_t non_improving_count = 0;
  std::size_t patience = 1;
};

enum class StopDecision { kContinue, kStop };

// Strict improvement resets the counter and records the epoch; anything
// else increments it. Stops once the counter reaches patience.
StopDecision early_stopping_step(EarlyStopperState& state, double value, int epoch);

struct TrainingHistory {
  std::vector<EpochRecord> records;
  bool stopped_early = false;
  int best_epoch = 0;
  std::filesystem::path checkpoint_path;
};

// Rescales every gradient by max_norm / ||g|| when the global L2 norm
// exceeds max_norm. Returns the factor (1 when untouched). Throws
// TrainingError on non-finite gradients and std::invalid_argument when
// max_norm <= 0.
double clip_gradient_norm(std::span<Tensor* const> gradients, double max_norm);
double clip_gradient_norm(ParameterList& params, double max_norm);

// "epoch=<i> lr=<r> <loss>=<v>... <metric>=<v>..."
std::string format_log_line(const EpochRecord& record);

// Writes train.log and curves.csv under a directory, one line / one row per
// scalar per epoch. Both files are truncated on construction.
class EpochRecorder {
 public:
  EpochRecorder(const std::filesystem::path& output_dir, bool console);
  void record(const EpochRecord& record);

 private:
  bool console_;
  std::ofstream log_;
  std::ofstream curves_;
};

// series -> [(epoch, value)] in file order.
using Curves = std::map<std::string, std::vector<std::pair<int, double>>>;
Curves read_curves(const std::filesystem::path& path);

class Trainer {
 public:
  explicit Trainer(TrainerConfig config, Evaluator evaluator = nullptr);

  // Without validation batches there is no early stopping and the final
  // parameters are kept; with them the best epoch is restored at the end.
  TrainingHistory fit(AbstractModel& model, const std::vector<KeyedBatch>& train,
                      const std::vector<KeyedBatch>* validation = nullptr);
  TrainingHistory fit(AbstractModel& model, const BatchProvider& train,
                      const std::vector<KeyedBatch>* validation = nullptr);

  // Mean of every loss entry over the epoch, weighted by batch size.
  std::vector<std::pair<std::string, double>> train_epoch(AbstractModel& model,
                                                          const std::vector<KeyedBatch>& batches,
                                                          Optimizer& optimizer, int epoch = 1);
  // Metrics over the concatenation of predict() across batches; the model is
  // put in evaluation mode for the call and left unmodified.
  MetricReport validate_epoch(AbstractModel& model, const std::vector<KeyedBatch>& batches);
  MetricReport evaluate(AbstractModel& model, const std::vector<KeyedBatch>& batches);

  const TrainerConfig& config() const { return config_; }

 private:
  TrainerConfig config_;
  Evaluator evaluator_;
};

}  // namespace fndkit
