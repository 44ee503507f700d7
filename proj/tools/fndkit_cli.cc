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

// Command-line front end: `fndkit run --config run.yaml [--set k=v ...]`,
// `fndkit defaults <model>` and `fndkit models`.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 any other
// failure during training or evaluation.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fndkit/error.h"
#include "fndkit/execution.h"
#include "fndkit/model.h"

namespace {

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kFailureExit = 4;

int run_command(const std::string& config, fndkit::RunOptions options) {
  const fndkit::RunResult result = fndkit::run_from_yaml(config, options);
  std::cout << fmt::format("output_dir={}\n", result.output_dir.string());
  std::cout << fmt::format("epochs_run={} best_epoch={} stopped_early={}\n",
                           result.history.records.size(), result.history.best_epoch,
                           result.history.stopped_early);
  for (const auto& [name, value] : result.test_metrics.entries()) {
    std::cout << fmt::format("test {}={}\n", name, value);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake news detection training toolkit"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Train (and test) a model from a YAML config");
  std::string config;
  fndkit::RunOptions options;
  bool quiet = false;
  run->add_option("--config", config, "Run configuration (YAML)")->required();
  run->add_option("--set", options.set, "Override a key, e.g. --set trainer.epochs=5")
      ->allow_extra_args(false);
  run->add_flag("--quiet", quiet, "Do not echo per-epoch log lines");
  run->add_flag("--timestamped", options.timestamped,
                "Write into a new timestamped subdirectory of the output directory");

  CLI::App* defaults = app.add_subcommand("defaults", "Print a model's default config as YAML");
  std::string model;
  defaults->add_option("model", model, "Registered model name")->required();

  app.add_subcommand("models", "List registered models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (run->parsed()) {
      options.log_to_console = !quiet;
      return run_command(config, std::move(options));
    }
    if (defaults->parsed()) {
      std::cout << fndkit::to_yaml(fndkit::default_params(model)) << '\n';
      return 0;
    }
    for (const std::string& name : fndkit::ModelRegistry::global().names()) {
      std::cout << name << '\n';
    }
    return 0;
  } catch (const fndkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const fndkit::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailureExit;
  }
}
