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

#include "fndkit/trainer.h"

#include <cmath>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "fndkit/checkpoint.h"
#include "fndkit/error.h"

namespace fndkit {

void TrainerConfig::validate() const {
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1, got {}", epochs));
  if (clip_max_norm && !(*clip_max_norm > 0.0)) {
    throw ConfigError(fmt::format("clip_max_norm must be positive, got {}", *clip_max_norm));
  }
  if (metrics.empty()) throw ConfigError("at least one metric name is required");
  for (const std::string& m : metrics) {
    const auto& known = supported_metric_names();
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError(fmt::format("unknown metric '{}'", m));
    }
  }
  if (early_stopping) {
    if (early_stopping->patience < 1) throw ConfigError("early stopping patience must be >= 1");
    if (std::find(metrics.begin(), metrics.end(), early_stopping->metric) == metrics.end()) {
      throw ConfigError(fmt::format("early stopping monitors '{}', which is not a configured metric",
                                    early_stopping->metric));
    }
  }
}

StopDecision early_stopping_step(EarlyStopperState& state, double value, int epoch) {
  if (value > state.best_value) {
    state.best_value = value;
    state.best_epoch = epoch;
    state.non_improving_count = 0;
  } else {
    ++state.non_improving_count;
  }
  return state.non_improving_count >= state.patience ? StopDecision::kStop
                                                     : StopDecision::kContinue;
}

double clip_gradient_norm(std::span<Tensor* const> gradients, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw std::invalid_argument(fmt::format("max_norm must be positive, got {}", max_norm));
  }
  double sq = 0.0;
  for (const Tensor* g : gradients) {
    for (double v : g->values()) sq += v * v;
  }
  if (!std::isfinite(sq)) throw TrainingError("non-finite gradient norm");
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (Tensor* g : gradients) {
    for (double& v : g->values()) v *= factor;
  }
  return factor;
}

double clip_gradient_norm(ParameterList& params, double max_norm) {
  std::vector<Tensor*> grads;
  for (auto& [name, var] : params) grads.push_back(&var.mutable_grad());
  return clip_gradient_norm(grads, max_norm);
}

std::string format_log_line(const EpochRecord& record) {
  std::string line = fmt::format("epoch={} lr={}", record.epoch, record.learning_rate);
  for (const auto& [name, v] : record.train_losses) line += fmt::format(" {}={}", name, v);
  if (record.val_metrics) {
    for (const auto& [name, v] : record.val_metrics->entries()) {
      line += fmt::format(" {}={}", name, v);
    }
  }
  return line;
}

EpochRecorder::EpochRecorder(const std::filesystem::path& output_dir, bool console)
    : console_(console) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  log_.open(output_dir / "train.log", std::ios::trunc);
  curves_.open(output_dir / "curves.csv", std::ios::trunc);
  if (!log_ || !curves_) {
    throw TrainingError(fmt::format("cannot write logs under {}", output_dir.string()));
  }
  curves_ << "series,epoch,value\n";
  curves_.flush();
}

void EpochRecorder::record(const EpochRecord& record) {
  const std::string line = format_log_line(record);
  if (console_) std::cout << line << std::endl;
  log_ << line << '\n';
  log_.flush();
  for (const auto& [name, v] : record.train_losses) {
    curves_ << fmt::format("train/{},{},{}\n", name, record.epoch, v);
  }
  if (record.val_metrics) {
    for (const auto& [name, v] : record.val_metrics->entries()) {
      curves_ << fmt::format("val/{},{},{}\n", name, record.epoch, v);
    }
  }
  curves_ << fmt::format("lr,{},{}\n", record.epoch, record.learning_rate);
  curves_.flush();
  if (!log_ || !curves_) throw TrainingError("failed writing epoch logs");
}

Curves read_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrainingError(fmt::format("cannot read {}", path.string()));
  std::string line;
  std::getline(in, line);
  if (line != "series,epoch,value") {
    throw TrainingError(fmt::format("{}: unexpected header '{}'", path.string(), line));
  }
  Curves out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw TrainingError(fmt::format("{}:{}: malformed row", path.string(), lineno));
    }
    try {
      out[line.substr(0, c1)].emplace_back(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)),
                                           std::stod(line.substr(c2 + 1)));
    } catch (const std::logic_error&) {
      throw TrainingError(fmt::format("{}:{}: malformed row", path.string(), lineno));
    }
  }
  return out;
}

Trainer::Trainer(TrainerConfig config, Evaluator evaluator)
    : config_(std::move(config)), evaluator_(std::move(evaluator)) {
  config_.validate();
  if (!evaluator_) {
    evaluator_ = [names = config_.metrics](const Tensor& probs, std::span<const int> labels) {
      return classification_metrics(probs, labels, names);
    };
  }
}

std::vector<std::pair<std::string, double>> Trainer::train_epoch(
    AbstractModel& model, const std::vector<KeyedBatch>& batches, Optimizer& optimizer,
    int epoch) {
  if (batches.empty()) throw TrainingError("no training batches");
  model.set_training(true);
  std::vector<std::pair<std::string, double>> sums;
  std::size_t seen = 0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const KeyedBatch& batch = batches[b];
    optimizer.zero_grad();
    LossReport report = model.calculate_loss(batch);
    const auto values = report.values();
    for (const auto& [name, v] : values) {
      if (!std::isfinite(v)) {
        throw TrainingError(
            fmt::format("non-finite loss '{}' = {} at epoch {} batch {}", name, v, epoch, b + 1));
      }
    }
    if (!std::isfinite(report.total().value().item())) {
      throw TrainingError(fmt::format("non-finite total loss at epoch {} batch {}", epoch, b + 1));
    }
    backward(report.total());
    if (config_.clip_max_norm) clip_gradient_norm(model.parameters(), *config_.clip_max_norm);
    optimizer.step();

    const double weight = static_cast<double>(batch.batch_size());
    if (sums.empty()) {
      for (const auto& [name, v] : values) sums.emplace_back(name, 0.0);
    }
    if (sums.size() != values.size()) {
      throw TrainingError(fmt::format("loss entries changed between batches at epoch {} batch {}",
                                      epoch, b + 1));
    }
    for (std::size_t i = 0; i < values.size(); ++i) sums[i].second += weight * values[i].second;
    seen += batch.batch_size();
  }
  for (auto& entry : sums) entry.second /= static_cast<double>(seen);
  return sums;
}

MetricReport Trainer::validate_epoch(AbstractModel& model,
                                     const std::vector<KeyedBatch>& batches) {
  if (batches.empty()) throw TrainingError("no evaluation batches");
  const bool was_training = model.training();
  model.set_training(false);
  std::vector<double> probs;
  std::vector<int> labels;
  std::size_t classes = 0;
  for (const KeyedBatch& batch : batches) {
    const Tensor p = model.predict(batch);
    classes = p.dim(1);
    probs.insert(probs.end(), p.values().begin(), p.values().end());
    const Tensor& y = batch.at(keys::kLabel);
    for (double v : y.values()) labels.push_back(static_cast<int>(v));
  }
  model.set_training(was_training);
  return evaluator_(Tensor({labels.size(), classes}, std::move(probs)), labels);
}

MetricReport Trainer::evaluate(AbstractModel& model, const std::vector<KeyedBatch>& batches) {
  return validate_epoch(model, batches);
}

TrainingHistory Trainer::fit(AbstractModel& model, const std::vector<KeyedBatch>& train,
                             const std::vector<KeyedBatch>* validation) {
  return fit(model, [&train](int) { return train; }, validation);
}

TrainingHistory Trainer::fit(AbstractModel& model, const BatchProvider& train,
                             const std::vector<KeyedBatch>* validation) {
  if (validation != nullptr && validation->empty()) validation = nullptr;
  model.to(config_.device);
  auto optimizer = make_optimizer(model.parameters(), config_.optimizer);

  const bool to_disk = !config_.output_dir.empty();
  std::optional<EpochRecorder> recorder;
  if (to_disk) recorder.emplace(config_.output_dir, config_.log_to_console);
  const std::filesystem::path ckpt_dir = config_.output_dir / "checkpoints";
  const std::filesystem::path best_path = ckpt_dir / "best.ckpt";

  const std::string monitored =
      config_.early_stopping ? config_.early_stopping->metric : std::string("accuracy");
  EarlyStopperState stopper;
  stopper.patience = config_.early_stopping ? config_.early_stopping->patience : 1;
  std::vector<Tensor> best_in_memory;

  TrainingHistory history;
  for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = optimizer->learning_rate();
    record.train_losses = train_epoch(model, train(epoch), *optimizer, epoch);

    StopDecision decision = StopDecision::kContinue;
    if (validation != nullptr) {
      record.val_metrics = validate_epoch(model, *validation);
      if (!record.val_metrics->contains(monitored)) {
        throw TrainingError(fmt::format("validation report lacks monitored metric '{}'", monitored));
      }
      const int best_before = stopper.best_epoch;
      decision = early_stopping_step(stopper, record.val_metrics->at(monitored), epoch);
      if (stopper.best_epoch != best_before) {
        if (to_disk) {
          save_checkpoint(model, best_path, epoch);
        } else {
          best_in_memory.clear();
          for (const auto& entry : model.parameters()) best_in_memory.push_back(entry.second.value());
        }
      }
    }
    if (to_disk && config_.keep_epoch_checkpoints) {
      save_checkpoint(model, ckpt_dir / fmt::format("epoch_{}.ckpt", epoch), epoch);
    }
    if (recorder) recorder->record(record);
    history.records.push_back(std::move(record));

    if (config_.scheduler) {
      const double next = config_.scheduler(epoch, optimizer->learning_rate());
      if (!(next > 0.0) || !std::isfinite(next)) {
        throw TrainingError(fmt::format("scheduler returned invalid learning rate {} after epoch {}",
                                        next, epoch));
      }
      optimizer->set_learning_rate(next);
    }
    if (config_.early_stopping && decision == StopDecision::kStop && epoch < config_.epochs) {
      history.stopped_early = true;
      break;
    }
  }

  if (validation != nullptr) {
    history.best_epoch = stopper.best_epoch;
    if (history.best_epoch != history.records.back().epoch) {
      if (to_disk) {
        restore_checkpoint(model, best_path);
      } else {
        std::size_t i = 0;
        for (auto& entry : model.parameters()) entry.second.mutable_value() = best_in_memory[i++];
      }
    }
    if (to_disk) history.checkpoint_path = best_path;
  } else {
    history.best_epoch = history.records.back().epoch;
    if (to_disk && config_.keep_epoch_checkpoints) {
      history.checkpoint_path = ckpt_dir / fmt::format("epoch_{}.ckpt", history.best_epoch);
    }
  }
  model.set_training(false);
  return history;
}

}  // namespace fndkit
