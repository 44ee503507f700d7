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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fndkit/error.h"
#include "fndkit/metrics.h"

namespace fndkit {
namespace {

const std::vector<std::string> kAll{"accuracy", "precision", "recall", "f1"};

// Two-column probabilities that argmax to the given hard predictions.
Tensor one_hot_probs(const std::vector<int>& predictions) {
  Tensor t({predictions.size(), 2});
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    t.at({i, static_cast<std::size_t>(predictions[i])}) = 0.9;
    t.at({i, static_cast<std::size_t>(1 - predictions[i])}) = 0.1;
  }
  return t;
}

Tensor scores_to_probs(const std::vector<double>& scores) {
  Tensor t({scores.size(), 2});
  for (std::size_t i = 0; i < scores.size(); ++i) {
    t.at({i, 1}) = scores[i];
    t.at({i, 0}) = 1.0 - scores[i];
  }
  return t;
}

TEST(Metrics, HandExample) {
  const std::vector<int> labels{1, 0, 0, 0};
  const MetricReport r = classification_metrics(one_hot_probs({1, 1, 0, 0}), labels, kAll);
  EXPECT_DOUBLE_EQ(r.at("accuracy"), 0.75);
  EXPECT_DOUBLE_EQ(r.at("precision"), 0.5);
  EXPECT_DOUBLE_EQ(r.at("recall"), 1.0);
  EXPECT_NEAR(r.at("f1"), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.names(), kAll);
}

TEST(Metrics, PerfectClassifierScoresOne) {
  const std::vector<int> labels{1, 0, 1, 1, 0};
  const MetricReport r = classification_metrics(one_hot_probs(labels), labels, kAll);
  for (const auto& name : kAll) EXPECT_EQ(r.at(name), 1.0) << name;
}

TEST(Metrics, ZeroDenominatorsGiveZero) {
  const std::vector<int> labels{0, 0, 0};
  const MetricReport r = classification_metrics(one_hot_probs({0, 0, 0}), labels, kAll);
  EXPECT_EQ(r.at("accuracy"), 1.0);
  EXPECT_EQ(r.at("precision"), 0.0);
  EXPECT_EQ(r.at("recall"), 0.0);
  EXPECT_EQ(r.at("f1"), 0.0);
}

TEST(Metrics, ArgmaxTiesGoToClassZero) {
  const Tensor probs({2, 2}, std::vector<double>{0.5, 0.5, 0.4, 0.6});
  EXPECT_EQ(argmax_rows(probs), (std::vector<int>{0, 1}));
}

TEST(Metrics, ConfusionMatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.4);
  std::vector<int> preds(500), labels(500);
  for (std::size_t i = 0; i < 500; ++i) {
    preds[i] = coin(rng);
    labels[i] = coin(rng);
  }
  ConfusionCounts oracle;
  for (std::size_t i = 0; i < 500; ++i) {
    if (preds[i] == 1 && labels[i] == 1) ++oracle.tp;
    if (preds[i] == 1 && labels[i] == 0) ++oracle.fp;
    if (preds[i] == 0 && labels[i] == 0) ++oracle.tn;
    if (preds[i] == 0 && labels[i] == 1) ++oracle.fn;
  }
  EXPECT_EQ(confusion_counts(preds, labels), oracle);

  const MetricReport r = classification_metrics(one_hot_probs(preds), labels, kAll);
  const double p = static_cast<double>(oracle.tp) / static_cast<double>(oracle.tp + oracle.fp);
  const double rc = static_cast<double>(oracle.tp) / static_cast<double>(oracle.tp + oracle.fn);
  EXPECT_NEAR(r.at("accuracy"), static_cast<double>(oracle.tp + oracle.tn) / 500.0, 1e-12);
  EXPECT_NEAR(r.at("precision"), p, 1e-12);
  EXPECT_NEAR(r.at("recall"), rc, 1e-12);
  EXPECT_NEAR(r.at("f1"), 2 * p * rc / (p + rc), 1e-12);
}

TEST(Auc, HandExamples) {
  const std::vector<int> labels{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auc_score(std::vector<double>{0.1, 0.4, 0.35, 0.8}, labels), 0.75);
  EXPECT_DOUBLE_EQ(auc_score(std::vector<double>{0.1, 0.2, 0.3, 0.4}, labels), 1.0);
  EXPECT_DOUBLE_EQ(auc_score(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels), 0.5);
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Auc, MatchesPairwiseOracleWithTies) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + static_cast<std::size_t>(trial) * 10;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // Coarse grid so ties are common.
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng() % 11) / 10.0;
      labels[i] = static_cast<int>(rng() % 2);
    }
    labels[0] = 0;
    labels[1] = 1;
    EXPECT_NEAR(auc_score(scores, labels), pairwise_auc(scores, labels), 1e-12);
  }
}

TEST(Auc, ReportedThroughClassificationMetrics) {
  const std::vector<double> scores{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels{0, 0, 1, 1};
  const std::vector<std::string> names{"auc"};
  EXPECT_DOUBLE_EQ(classification_metrics(scores_to_probs(scores), labels, names).at("auc"), 0.75);
}

TEST(Metrics, PermutationInvariance) {
  std::mt19937_64 rng(13);
  std::vector<double> scores(60);
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) {
    scores[i] = std::uniform_real_distribution<double>(0, 1)(rng);
    labels[i] = static_cast<int>(i % 3 == 0);
  }
  const std::vector<std::string> names{"accuracy", "precision", "recall", "f1", "auc"};
  const MetricReport base = classification_metrics(scores_to_probs(scores), labels, names);
  std::vector<std::size_t> order(60);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> s2;
  std::vector<int> l2;
  for (std::size_t i : order) {
    s2.push_back(scores[i]);
    l2.push_back(labels[i]);
  }
  const MetricReport permuted = classification_metrics(scores_to_probs(s2), l2, names);
  for (const auto& name : names) EXPECT_NEAR(base.at(name), permuted.at(name), 1e-12) << name;
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(14);
  std::vector<double> scores(80);
  std::vector<int> labels(80);
  for (std::size_t i = 0; i < 80; ++i) {
    scores[i] = std::uniform_real_distribution<double>(0, 1)(rng);
    labels[i] = static_cast<int>(rng() % 2);
  }
  std::vector<double> squashed;
  for (double s : scores) squashed.push_back(std::pow(s, 3.0) * 0.5 + 0.1);
  EXPECT_NEAR(auc_score(scores, labels), auc_score(squashed, labels), 1e-12);
}

TEST(Auc, SingleClassIsMetricError) {
  const std::vector<int> labels{1, 1, 1};
  EXPECT_THROW(auc_score(std::vector<double>{0.1, 0.2, 0.3}, labels), MetricError);
  const std::vector<std::string> names{"auc"};
  EXPECT_THROW(classification_metrics(scores_to_probs({0.1, 0.2, 0.3}), labels, names),
               MetricError);
}

TEST(Metrics, RejectsMalformedInputs) {
  const std::vector<int> labels{0, 1};
  EXPECT_THROW(classification_metrics(Tensor({2, 2}, std::vector<double>{0.5, 0.6, 0.5, 0.5}),
                                      labels, kAll),
               std::invalid_argument);
  EXPECT_THROW(classification_metrics(one_hot_probs({0, 1, 1}), labels, kAll),
               std::invalid_argument);
  EXPECT_THROW(classification_metrics(one_hot_probs({0, 1}), std::vector<int>{0, 2}, kAll),
               std::invalid_argument);
  const std::vector<std::string> bogus{"mcc"};
  EXPECT_THROW(classification_metrics(one_hot_probs({0, 1}), labels, bogus),
               std::invalid_argument);
}

TEST(MetricReportTest, JsonAndLookup) {
  MetricReport r;
  r.set("accuracy", 0.5);
  r.set("f1", 0.25);
  EXPECT_EQ(r.to_json(), (nlohmann::json{{"accuracy", 0.5}, {"f1", 0.25}}));
  EXPECT_THROW(r.at("auc"), std::out_of_range);
}

}  // namespace
}  // namespace fndkit
