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

#include <stdexcept>
#include <string>

namespace fndkit {

// Root of every error the library throws on purpose. Callers that only care
// about "something in the pipeline failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration: unknown keys, bad values,
// unknown model names, duplicate registrations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Problems with input files and records: JSON shape, missing fields,
// label ranges, image decoding.
class DataError : public Error {
 public:
  using Error::Error;
};

// A model was handed a batch it cannot consume (missing key, bad index,
// wrong sequence length).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Training could not proceed (non-finite loss or gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given inputs (e.g. AUC over one class).
class MetricError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace fndkit
