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

#include "synthetic.h"

#include <atomic>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <unistd.h>

#include "fndkit/autograd.h"

namespace fndkit::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("fndkit-test-{}-{}", ::getpid(), counter++);
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream f(path);
  f << doc.dump();
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double low, double high) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(low, high);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

namespace {

std::vector<std::string> filler(std::mt19937_64& rng, std::size_t vocab, std::size_t first) {
  std::uniform_int_distribution<std::size_t> len(5, 20);
  std::uniform_int_distribution<std::size_t> word(first, vocab - 1);
  std::vector<std::string> toks(len(rng));
  for (auto& t : toks) t = fmt::format("w{}", word(rng));
  return toks;
}

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

nlohmann::json trigger_corpus(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    auto toks = filler(rng, vocab, 1);
    const int label = static_cast<int>(rng() % 2);
    if (label == 1) toks[rng() % toks.size()] = "w0";
    out.push_back({{"text", join(toks)}, {"label", label}});
  }
  return out;
}

nlohmann::json multidomain_corpus(std::size_t n, std::size_t domains, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    auto toks = filler(rng, 50, 0);
    const std::size_t domain = rng() % domains;
    const int label = static_cast<int>(rng() % 2);
    if (label == 1) {
      toks[rng() % toks.size()] = fmt::format("t{}", domain);
    } else if (rng() % 2 == 0) {
      toks[rng() % toks.size()] = fmt::format("t{}", (domain + 1 + rng() % (domains - 1)) % domains);
    }
    out.push_back({{"text", join(toks)}, {"domain", domain}, {"label", label}});
  }
  return out;
}

nlohmann::json eann_corpus(std::size_t n, std::size_t feature_dim, std::size_t events,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    auto toks = filler(rng, 40, 1);
    const int label = static_cast<int>(rng() % 2);
    const std::size_t event = rng() % events;
    if (label == 1) toks[rng() % toks.size()] = "w0";
    toks[rng() % toks.size()] = fmt::format("e{}", event);
    std::vector<double> feature(feature_dim);
    for (double& f : feature) f = noise(rng);
    feature[0] += label == 1 ? 1.0 : -1.0;
    out.push_back({{"text", join(toks)},
                   {"label", label},
                   {"event", event},
                   {"image_feature", feature}});
  }
  return out;
}

nlohmann::json graph_corpus(std::size_t n, std::size_t feature_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t nodes = 1 + rng() % 8;
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t v = 0; v < nodes; ++v) {
      std::vector<double> row(feature_dim);
      for (double& x : row) x = noise(rng);
      features.push_back(row);
    }
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t v = 1; v < nodes; ++v) edges.push_back({rng() % v, v});
    const int label = features[0][0].get<double>() > 0.0 ? 1 : 0;
    out.push_back({{"node_features", features}, {"edges", edges}, {"root", 0}, {"label", label}});
  }
  return out;
}

std::vector<KeyedBatch> text_batches(const nlohmann::json& records, std::size_t max_len,
                                     std::size_t batch_size, std::size_t vocab_size) {
  std::vector<SampleRecord> parsed = parse_json_records(records, {keys::kLabel});
  std::vector<std::string> texts;
  for (const auto& r : parsed) texts.push_back(r.fields.at(keys::kText).get<std::string>());
  const Vocabulary vocab = Vocabulary::build(texts, vocab_size);
  TextDataset ds(std::move(parsed), [vocab, max_len](std::string_view text) {
    return reference_tokenize(text, vocab, max_len);
  });
  return make_batches(ds, batch_size, false, 0);
}

std::vector<KeyedBatch> graph_batches(const nlohmann::json& records, std::size_t batch_size) {
  PropagationGraphDataset ds(parse_json_records(records, {keys::kLabel}));
  return make_batches(ds, batch_size, false, 0);
}

double numeric_gradient(Var& param, std::size_t index, const std::function<double()>& loss,
                        double eps) {
  double& w = param.mutable_value()[index];
  const double saved = w;
  w = saved + eps;
  const double up = loss();
  w = saved - eps;
  const double down = loss();
  w = saved;
  return (up - down) / (2.0 * eps);
}

std::vector<GradientCheck> check_model_gradients(AbstractModel& model, const KeyedBatch& batch,
                                                 std::size_t samples, std::uint64_t seed,
                                                 double floor, GradientObjective objective) {
  if (!objective) {
    objective = [](const LossReport& r, std::string_view) { return r.total().value().item(); };
  }
  model.set_training(false);
  model.parameters().zero_grad();
  backward(model.calculate_loss(batch).total());

  std::string current;
  auto loss = [&] {
    NoGradGuard no_grad;
    return objective(model.calculate_loss(batch), current);
  };
  std::vector<std::pair<std::string, Var>> params(model.parameters().begin(),
                                                  model.parameters().end());
  std::mt19937_64 rng(seed);
  std::vector<GradientCheck> out;
  for (std::size_t s = 0; s < samples; ++s) {
    auto& [name, var] = params[rng() % params.size()];
    current = name;
    const Tensor grad = var.grad();
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (std::abs(grad[i]) > floor) live.push_back(i);
    }
    const std::size_t index = live.empty() ? rng() % grad.size() : live[rng() % live.size()];
    GradientCheck c;
    c.parameter = name;
    c.index = index;
    c.analytic = grad[index];
    c.numeric = numeric_gradient(var, index, loss);
    const double scale = std::max(std::abs(c.analytic), std::abs(c.numeric));
    c.relative_error = scale < floor ? 0.0 : std::abs(c.analytic - c.numeric) / scale;
    out.push_back(c);
  }
  return out;
}

GradientObjective adversarial_objective(double lambda) {
  return [lambda](const LossReport& r, std::string_view parameter) {
    if (parameter.starts_with("discriminator")) return r.value("total");
    return r.value("classification") - lambda * r.value("event_adversarial");
  };
}

}  // namespace fndkit::testing
