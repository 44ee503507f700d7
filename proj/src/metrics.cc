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

#include "fndkit/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "fndkit/error.h"

namespace fndkit {

void MetricReport::set(std::string name, double value) {
  for (auto& entry : entries_) {
    if (entry.first == name) {
      entry.second = value;
      return;
    }
  }
  entries_.emplace_back(std::move(name), value);
}

bool MetricReport::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

double MetricReport::at(std::string_view name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  throw std::out_of_range(fmt::format("metric '{}' not in report", name));
}

std::vector<std::string> MetricReport::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [n, v] : entries_) out[n] = v;
  return out;
}

std::vector<int> argmax_rows(const Tensor& probs) {
  expect_rank(probs, 2, "probabilities");
  const std::size_t rows = probs.dim(0);
  const std::size_t cols = probs.dim(1);
  std::vector<int> out(rows, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (probs[r * cols + c] > probs[r * cols + best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

ConfusionCounts confusion_counts(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument(fmt::format("{} predictions for {} labels", predictions.size(),
                                            labels.size()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == 1;
    const bool actual = labels[i] == 1;
    if (predicted && actual) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricReport classification_metrics(const Tensor& probs, std::span<const int> labels,
                                    std::span<const std::string> metric_names) {
  if (probs.rank() != 2) {
    throw std::invalid_argument("probabilities must be [B, C], got " + shape_string(probs.shape()));
  }
  const std::size_t batch = probs.dim(0);
  const std::size_t classes = probs.dim(1);
  if (batch == 0) throw std::invalid_argument("classification_metrics: empty batch");
  if (labels.size() != batch) {
    throw std::invalid_argument(fmt::format("classification_metrics: {} labels for {} rows",
                                            labels.size(), batch));
  }
  for (std::size_t r = 0; r < batch; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += probs[r * classes + c];
    if (std::abs(total - 1.0) > 1e-5) {
      throw std::invalid_argument(fmt::format("probability row {} sums to {}", r, total));
    }
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      throw std::invalid_argument(fmt::format("label {} outside [0, {})", labels[r], classes));
    }
  }

  const std::vector<int> predictions = argmax_rows(probs);
  const ConfusionCounts c = confusion_counts(predictions, labels);
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < batch; ++i) correct += predictions[i] == labels[i] ? 1 : 0;

  const double precision = ratio(c.tp, c.tp + c.fp);
  const double recall = ratio(c.tp, c.tp + c.fn);
  MetricReport report;
  for (const std::string& name : metric_names) {
    if (name == "accuracy") {
      report.set(name, ratio(correct, static_cast<std::int64_t>(batch)));
    } else if (name == "precision") {
      report.set(name, precision);
    } else if (name == "recall") {
      report.set(name, recall);
    } else if (name == "f1") {
      report.set(name, precision + recall == 0.0
                           ? 0.0
                           : 2.0 * precision * recall / (precision + recall));
    } else if (name == "auc") {
      if (classes < 2) throw MetricError("auc needs a positive-class column");
      std::vector<double> scores(batch);
      for (std::size_t r = 0; r < batch; ++r) scores[r] = probs[r * classes + 1];
      report.set(name, auc_score(scores, labels));
    } else {
      throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
    }
  }
  return report;
}

double auc_score(std::span<const double> positive_scores, std::span<const int> labels) {
  if (positive_scores.size() != labels.size()) {
    throw std::invalid_argument(fmt::format("auc_score: {} scores for {} labels",
                                            positive_scores.size(), labels.size()));
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return positive_scores[a] < positive_scores[b];
  });
  // Mann-Whitney U: sum of positive ranks with tied groups sharing the mean rank.
  double positive_rank_sum = 0.0;
  std::int64_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && positive_scores[order[j]] == positive_scores[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += mean_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw MetricError("auc is undefined when labels contain a single class");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

}  // namespace fndkit
