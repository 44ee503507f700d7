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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndkit/tensor.h"

namespace fndkit {

// Binary confusion counts with class 1 ("fake") as the positive class.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Named metric values in the order they were requested.
class MetricReport {
 public:
  MetricReport() = default;

  void set(std::string name, double value);
  bool contains(std::string_view name) const;
  // Throws std::out_of_range when absent.
  double at(std::string_view name) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::vector<std::string> names() const;
  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }

  // Flat {"name": value} object.
  nlohmann::json to_json() const;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

inline const std::vector<std::string>& supported_metric_names() {
  static const std::vector<std::string> names{"accuracy", "precision", "recall", "f1", "auc"};
  return names;
}

// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const Tensor& probs);

ConfusionCounts confusion_counts(std::span<const int> predictions, std::span<const int> labels);

// probs[B, C] (rows sum to 1 within 1e-5), labels[B] in [0, C). Precision,
// recall and f1 are 0 when their denominator is 0. "auc" scores column 1.
MetricReport classification_metrics(const Tensor& probs, std::span<const int> labels,
                                    std::span<const std::string> metric_names);

// Probability that a random positive outranks a random negative, ties
// counting one half. Throws MetricError if only one class is present.
double auc_score(std::span<const double> positive_scores, std::span<const int> labels);

}  // namespace fndkit
