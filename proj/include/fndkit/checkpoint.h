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
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fndkit/model.h"

// Container layout, all integers little-endian u64 unless noted:
//   "FNDCKPT1\n"
//   manifest length, manifest JSON {model, params, seed, epoch}
//   array count, then per array:
//     name length, name bytes, dtype (u8, 1 = f64), rank, dims..., f64 data
namespace fndkit {

struct CheckpointManifest {
  std::string model;
  ModelParams params;
  std::uint64_t seed = 0;
  int epoch = 0;
};

struct CheckpointData {
  CheckpointManifest manifest;
  std::vector<std::pair<std::string, Tensor>> arrays;
};

// Throws CheckpointError when the file cannot be written.
void save_checkpoint(const AbstractModel& model, const std::filesystem::path& path,
                     int epoch = 0);

// Throws CheckpointError for a missing or malformed file.
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Rebuilds the model through the global registry, then loads its arrays.
std::unique_ptr<AbstractModel> load_checkpoint(const std::filesystem::path& path);

// Copies arrays into an existing model. Names and shapes must match the
// model's parameters exactly, otherwise CheckpointError.
void load_parameters(AbstractModel& model, const CheckpointData& data);
void restore_checkpoint(AbstractModel& model, const std::filesystem::path& path);

}  // namespace fndkit
