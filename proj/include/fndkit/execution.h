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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndkit/metrics.h"
#include "fndkit/trainer.h"

// One-call entry points. A run configuration is a nested document:
//
//   model: textcnn
//   data: {train, validation, test, split: {ratios, seed}}
//   model_params: {...}            # forwarded to the model factory
//   trainer: {epochs, learning_rate, optimizer, batch_size, clip_max_norm,
//             early_stopping: {patience, metric}, device, seed, output_dir}
//   metrics: [accuracy, precision, recall, f1]
//
// Overrides may use nested mappings, dotted keys ("trainer.epochs") or the
// shorthands "train", "validation" and "test" for the data paths.
namespace fndkit {

using RunConfig = nlohmann::json;

// Per-model default fragments. Models registered without an explicit entry
// get the generic trainer defaults plus their own parameter defaults.
class DefaultsRegistry {
 public:
  static DefaultsRegistry& global();

  void set(std::string model, RunConfig fragment);
  // Complete fragment for a registered model; always a fresh copy.
  RunConfig get(std::string_view model) const;

 private:
  std::map<std::string, RunConfig> fragments_;
};

RunConfig default_params(std::string_view model);

// Canonical dotted leaf path -> value. Throws ConfigError on unknown keys
// (with the nearest valid key as a suggestion) and on the same setting
// spelled twice.
std::map<std::string, nlohmann::json> normalize_overrides(const nlohmann::json& overrides);

// Defaults merged with overrides, types checked.
RunConfig resolve_config(std::string_view model, const nlohmann::json& overrides);

struct RunOptions {
  // Put the run in a fresh timestamped subdirectory instead of failing when
  // the output directory already holds a run.
  bool timestamped = false;
  // "dotted.key=value" pairs applied last; values are parsed as YAML.
  std::vector<std::string> set;
  // Echo each epoch's log line to stdout as well as train.log.
  bool log_to_console = true;
};

struct RunResult {
  MetricReport test_metrics;  // empty without test data
  TrainingHistory history;
  std::filesystem::path output_dir;
  RunConfig resolved;  // what resolved_config.yaml holds
};

RunResult run(std::string_view model, const nlohmann::json& overrides,
              const RunOptions& options = {});
// The document must name "model"; everything else is an override.
RunResult run_from_yaml(const std::filesystem::path& path, const RunOptions& options = {});

// YAML <-> JSON for configuration documents. Parse errors become
// ConfigError with the 1-based line number.
nlohmann::json load_yaml(const std::filesystem::path& path);
nlohmann::json parse_yaml(const std::string& text, const std::string& origin = "<string>");
std::string to_yaml(const nlohmann::json& document);

std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace fndkit
