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

#include "fndkit/execution.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <optional>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "fndkit/dataset.h"
#include "fndkit/error.h"
#include "fndkit/model.h"

namespace fndkit {

namespace {

using json = nlohmann::json;

std::mutex& defaults_mutex() {
  static std::mutex m;
  return m;
}

const std::set<std::string>& container_paths() {
  static const std::set<std::string> paths{"data", "data.split", "trainer",
                                           "trainer.early_stopping", "model_params"};
  return paths;
}

const std::set<std::string>& leaf_paths() {
  static const std::set<std::string> paths{
      "model",
      "data.train",
      "data.validation",
      "data.test",
      "data.split.ratios",
      "data.split.seed",
      "trainer.epochs",
      "trainer.learning_rate",
      "trainer.optimizer",
      "trainer.batch_size",
      "trainer.clip_max_norm",
      "trainer.early_stopping",
      "trainer.early_stopping.patience",
      "trainer.early_stopping.metric",
      "trainer.device",
      "trainer.seed",
      "trainer.output_dir",
      "metrics",
  };
  return paths;
}

std::string canonical_alias(const std::string& path) {
  if (path == "train" || path == "validation" || path == "test") return "data." + path;
  return path;
}

std::string suggestion_for(const std::string& key) {
  std::string best;
  std::size_t best_distance = std::string::npos;
  auto consider = [&](const std::string& candidate) {
    const std::string last = candidate.substr(candidate.rfind('.') + 1);
    const std::size_t d = std::min(edit_distance(key, candidate), edit_distance(key, last));
    if (d < best_distance) {
      best_distance = d;
      best = candidate;
    }
  };
  for (const std::string& p : leaf_paths()) consider(p);
  consider("model_params");
  return best;
}

void flatten(const std::string& prefix, const json& node, std::map<std::string, json>& out) {
  for (const auto& item : node.items()) {
    const std::string path = canonical_alias(prefix.empty() ? item.key() : prefix + "." + item.key());
    const json& value = item.value();
    if (container_paths().contains(path)) {
      if (value.is_object()) {
        flatten(path, value, out);
        continue;
      }
      if (path != "trainer.early_stopping" || !(value.is_null() || value == false)) {
        throw ConfigError(fmt::format("'{}' must be a mapping, got {}", path, value.dump()));
      }
    } else if (!leaf_paths().contains(path) && !path.starts_with("model_params.")) {
      throw ConfigError(fmt::format("unknown key '{}'; did you mean '{}'?", path,
                                    suggestion_for(path)));
    }
    if (out.contains(path)) {
      throw ConfigError(fmt::format("conflicting keys: '{}' is given more than once", path));
    }
    out.emplace(path, value);
  }
}

json default_early_stopping() { return {{"patience", 5}, {"metric", "accuracy"}}; }

json generic_defaults(const std::string& model) {
  json params = resolve_model(model, json::object())->params();
  params.erase("seed");
  return {
      {"model", model},
      {"data",
       {{"train", nullptr},
        {"validation", nullptr},
        {"test", nullptr},
        {"split", {{"ratios", {0.8, 0.1, 0.1}}, {"seed", 0}}}}},
      {"model_params", params},
      {"trainer",
       {{"epochs", 20},
        {"learning_rate", 1e-3},
        {"optimizer", "adam"},
        {"batch_size", 64},
        {"clip_max_norm", nullptr},
        {"early_stopping", default_early_stopping()},
        {"device", "cpu"},
        {"seed", 0},
        {"output_dir", nullptr}}},
      {"metrics", {"accuracy", "precision", "recall", "f1"}},
  };
}

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null() && path.substr(0, dot) == "trainer.early_stopping") {
      next = default_early_stopping();
    }
    node = &next;
    start = dot + 1;
  }
}

// Typed accessors over the resolved document; failures name the key.
const json& at_path(const json& doc, const std::string& path) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    node = &node->at(path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

[[noreturn]] void bad_value(const std::string& path, const json& v, const char* expected) {
  throw ConfigError(fmt::format("'{}' must be {}, got {}", path, expected, v.dump()));
}

std::uint64_t get_count(const json& doc, const std::string& path, std::uint64_t minimum) {
  const json& v = at_path(doc, path);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum)) {
    bad_value(path, v, minimum == 0 ? "a non-negative integer" : "a positive integer");
  }
  return v.get<std::uint64_t>();
}

double get_positive(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_number() || !(v.get<double>() > 0.0)) bad_value(path, v, "a positive number");
  return v.get<double>();
}

std::string get_string(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (!v.is_string()) bad_value(path, v, "a string");
  return v.get<std::string>();
}

std::optional<std::filesystem::path> get_optional_path(const json& doc, const std::string& path) {
  const json& v = at_path(doc, path);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string() || v.get<std::string>().empty()) bad_value(path, v, "a path or null");
  return std::filesystem::path(v.get<std::string>());
}

struct ParsedConfig {
  std::string model;
  std::optional<std::filesystem::path> train, validation, test;
  SplitRatios ratios;
  std::uint64_t split_seed = 0;
  std::size_t batch_size = 64;
  TrainerConfig trainer;
};

ParsedConfig parse_config(const json& cfg) {
  ParsedConfig p;
  p.model = get_string(cfg, "model");
  p.train = get_optional_path(cfg, "data.train");
  p.validation = get_optional_path(cfg, "data.validation");
  p.test = get_optional_path(cfg, "data.test");

  const json& ratios = at_path(cfg, "data.split.ratios");
  if (!ratios.is_array() || ratios.size() != 3 ||
      !std::all_of(ratios.begin(), ratios.end(), [](const json& r) { return r.is_number(); })) {
    bad_value("data.split.ratios", ratios, "a list of three numbers");
  }
  p.ratios = {ratios[0].get<double>(), ratios[1].get<double>(), ratios[2].get<double>()};
  try {
    detail::split_sizes(0, p.ratios);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("data.split.ratios: {}", e.what()));
  }
  p.split_seed = get_count(cfg, "data.split.seed", 0);

  TrainerConfig& t = p.trainer;
  t.epochs = static_cast<int>(get_count(cfg, "trainer.epochs", 1));
  t.optimizer.learning_rate = get_positive(cfg, "trainer.learning_rate");
  t.optimizer.name = get_string(cfg, "trainer.optimizer");
  p.batch_size = get_count(cfg, "trainer.batch_size", 1);
  if (!at_path(cfg, "trainer.clip_max_norm").is_null()) {
    t.clip_max_norm = get_positive(cfg, "trainer.clip_max_norm");
  }
  if (!at_path(cfg, "trainer.early_stopping").is_null()) {
    t.early_stopping = EarlyStoppingConfig{
        get_count(cfg, "trainer.early_stopping.patience", 1),
        get_string(cfg, "trainer.early_stopping.metric")};
  }
  t.device = get_string(cfg, "trainer.device");
  t.seed = get_count(cfg, "trainer.seed", 0);
  if (auto dir = get_optional_path(cfg, "trainer.output_dir")) t.output_dir = *dir;

  const json& metrics = at_path(cfg, "metrics");
  if (!metrics.is_array() || metrics.empty() ||
      !std::all_of(metrics.begin(), metrics.end(), [](const json& m) { return m.is_string(); })) {
    bad_value("metrics", metrics, "a non-empty list of metric names");
  }
  t.metrics = metrics.get<std::vector<std::string>>();
  t.validate();
  return p;
}

std::filesystem::path choose_output_dir(const ParsedConfig& cfg, bool timestamped) {
  std::filesystem::path dir = cfg.trainer.output_dir;
  if (dir.empty()) {
    const char* root = std::getenv("FNDKIT_OUTPUT_ROOT");
    dir = std::filesystem::path(root != nullptr && *root != '\0' ? root : "runs") / cfg.model;
  }
  if (timestamped) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    std::filesystem::path candidate = dir / stamp;
    for (int i = 1; std::filesystem::exists(candidate); ++i) {
      candidate = dir / fmt::format("{}-{}", stamp, i);
    }
    return candidate;
  }
  if (std::filesystem::exists(dir / "resolved_config.yaml")) {
    throw ConfigError(fmt::format(
        "output directory {} already holds a run; choose another trainer.output_dir or request a "
        "timestamped subdirectory",
        dir.string()));
  }
  return dir;
}

std::vector<SampleRecord> load_split(const std::filesystem::path& path,
                                     const std::set<std::string>& required) {
  if (!std::filesystem::exists(path)) {
    throw DataError(fmt::format("data file not found: {}", path.string()));
  }
  return load_json_dataset(path, required);
}

void check_domains(const std::vector<SampleRecord>& records, std::size_t num_domains,
                   const char* split) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& d = records[i].fields.at(keys::kDomain);
    if (!d.is_number_integer() || d.get<long long>() < 0 ||
        d.get<long long>() >= static_cast<long long>(num_domains)) {
      throw DataError(fmt::format("{} element {}: domain {} outside [0, {})", split, i, d.dump(),
                                  num_domains));
    }
  }
}

// Parses a plain (unquoted) YAML scalar the way the core schema would.
json plain_scalar(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  static const std::regex integer(R"([-+]?[0-9]+)");
  static const std::regex floating(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (std::regex_match(s, integer)) {
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    if (s[0] == '-') {
      long long v = 0;
      if (std::from_chars(begin, s.data() + s.size(), v).ec == std::errc()) return v;
    } else {
      unsigned long long v = 0;
      if (std::from_chars(begin, s.data() + s.size(), v).ec == std::errc()) return v;
    }
  }
  if (std::regex_match(s, floating)) {
    double v = 0.0;
    const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
    if (std::from_chars(begin, s.data() + s.size(), v).ec == std::errc()) return v;
  }
  return s;
}

json yaml_to_json(const YAML::Node& node, const std::string& origin) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return node.Tag() == "!" ? json(node.Scalar()) : plain_scalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item, origin));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& item : node) {
        const std::string key = item.first.as<std::string>();
        if (out.contains(key)) {
          throw ConfigError(fmt::format("{}:{}: conflicting keys: '{}' appears twice", origin,
                                        item.first.Mark().line + 1, key));
        }
        out[key] = yaml_to_json(item.second, origin);
      }
      return out;
    }
  }
  return nullptr;
}

void emit(YAML::Emitter& out, const json& v) {
  switch (v.type()) {
    case json::value_t::object:
      if (v.empty()) {
        out << YAML::Flow << YAML::BeginMap << YAML::EndMap;
        return;
      }
      out << YAML::BeginMap;
      for (const auto& item : v.items()) {
        out << YAML::Key << item.key() << YAML::Value;
        emit(out, item.value());
      }
      out << YAML::EndMap;
      return;
    case json::value_t::array: {
      const bool flat = std::none_of(v.begin(), v.end(), [](const json& e) {
        return e.is_object() || e.is_array();
      });
      if (flat) out << YAML::Flow;
      out << YAML::BeginSeq;
      for (const auto& e : v) emit(out, e);
      out << YAML::EndSeq;
      return;
    }
    case json::value_t::string: {
      const std::string& s = v.get_ref<const std::string&>();
      if (plain_scalar(s).is_string()) {
        out << s;
      } else {
        out << YAML::DoubleQuoted << s;
      }
      return;
    }
    case json::value_t::boolean:
      out << v.get<bool>();
      return;
    case json::value_t::number_integer:
      out << fmt::format("{}", v.get<long long>());
      return;
    case json::value_t::number_unsigned:
      out << fmt::format("{}", v.get<unsigned long long>());
      return;
    case json::value_t::number_float: {
      // Keep a float marker so the value parses back as a float.
      std::string s = fmt::format("{}", v.get<double>());
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out << s;
      return;
    }
    default:
      out << YAML::Null;
      return;
  }
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

DefaultsRegistry& DefaultsRegistry::global() {
  static DefaultsRegistry* registry = [] {
    auto* r = new DefaultsRegistry();
    r->set("mdfend", {{"trainer", {{"learning_rate", 5e-5}, {"epochs", 50}, {"batch_size", 64}}}});
    return r;
  }();
  return *registry;
}

void DefaultsRegistry::set(std::string model, RunConfig fragment) {
  std::lock_guard lock(defaults_mutex());
  fragments_[to_lower(model)] = std::move(fragment);
}

RunConfig DefaultsRegistry::get(std::string_view model) const {
  const std::string name = to_lower(model);
  RunConfig out = generic_defaults(name);  // throws ConfigError for unknown models
  std::lock_guard lock(defaults_mutex());
  auto it = fragments_.find(name);
  if (it != fragments_.end()) out.merge_patch(it->second);
  return out;
}

RunConfig default_params(std::string_view model) { return DefaultsRegistry::global().get(model); }

std::map<std::string, json> normalize_overrides(const json& overrides) {
  std::map<std::string, json> flat;
  if (overrides.is_null()) return flat;
  if (!overrides.is_object()) throw ConfigError("overrides must be a mapping");
  flatten("", overrides, flat);
  if (flat.contains("trainer.early_stopping")) {
    for (const auto& [path, v] : flat) {
      if (path.starts_with("trainer.early_stopping.")) {
        throw ConfigError(fmt::format(
            "conflicting keys: 'trainer.early_stopping' and '{}' are both given", path));
      }
    }
  }
  return flat;
}

RunConfig resolve_config(std::string_view model, const json& overrides) {
  const auto flat = normalize_overrides(overrides);
  const std::string name = to_lower(model);
  if (auto it = flat.find("model"); it != flat.end()) {
    if (!it->second.is_string() || to_lower(it->second.get<std::string>()) != name) {
      throw ConfigError(fmt::format("conflicting keys: model '{}' requested but overrides name {}",
                                    name, it->second.dump()));
    }
  }
  RunConfig cfg = default_params(name);
  for (const auto& [path, value] : flat) {
    if (path == "model") continue;
    set_path(cfg, path, value.is_boolean() && path == "trainer.early_stopping" ? json() : value);
  }
  parse_config(cfg);
  return cfg;
}

RunResult run(std::string_view model_name, const json& overrides, const RunOptions& options) {
  // Fold --set style overrides into the mapping; a later setting of the same
  // leaf replaces the earlier one.
  std::map<std::string, json> flat = normalize_overrides(overrides);
  for (const std::string& assignment : options.set) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
    }
    json single = json::object();
    single[assignment.substr(0, eq)] = parse_yaml(assignment.substr(eq + 1), assignment);
    for (auto& [path, value] : normalize_overrides(single)) {
      std::erase_if(flat, [&](const auto& e) {
        return e.first == path || e.first.starts_with(path + ".") ||
               path.starts_with(e.first + ".");
      });
      flat[path] = std::move(value);
    }
  }
  json merged = json::object();
  for (const auto& [path, value] : flat) merged[path] = value;

  RunConfig cfg = resolve_config(model_name, merged);
  const ParsedConfig parsed = parse_config(cfg);
  const ModelSpec& spec = ModelRegistry::global().spec(parsed.model);
  auto user_set = [&flat](const std::string& path) { return flat.contains(path); };

  // 1. Records.
  if (!parsed.train) throw ConfigError("data.train is required");
  std::vector<SampleRecord> train = load_split(*parsed.train, spec.required_fields);
  std::vector<SampleRecord> validation, test;
  if (parsed.validation) validation = load_split(*parsed.validation, spec.required_fields);
  if (parsed.test) test = load_split(*parsed.test, spec.required_fields);
  if (!parsed.validation && !parsed.test) {
    DataSplit<SampleRecord> parts = split_data(std::move(train), parsed.ratios, parsed.split_seed);
    train = std::move(parts.train);
    validation = std::move(parts.validation);
    test = std::move(parts.test);
  }
  if (train.empty()) throw DataError("training split is empty");

  // 2. Model parameters that depend on the data, unless given explicitly.
  json& params = cfg["model_params"];
  if (!user_set("model_params.seed")) params["seed"] = parsed.trainer.seed;
  auto all_records = [&](auto&& fn) {
    for (const auto* split : {&train, &validation, &test}) {
      for (const SampleRecord& r : *split) fn(r);
    }
  };
  if (params.contains("image_feature_dim") && !user_set("model_params.image_feature_dim") &&
      train.front().has(keys::kImageFeature)) {
    const json& feature = train.front().fields.at(keys::kImageFeature);
    if (feature.is_array() && !feature.empty()) params["image_feature_dim"] = feature.size();
  }
  if (params.contains("num_events") && !user_set("model_params.num_events") &&
      train.front().has(keys::kEvent)) {
    long long max_event = 1;
    all_records([&](const SampleRecord& r) {
      const json& e = r.fields.at(keys::kEvent);
      if (e.is_number_integer()) max_event = std::max(max_event, e.get<long long>());
    });
    params["num_events"] = max_event + 1;
  }

  // 3. Datasets.
  std::unique_ptr<Dataset> train_ds, val_ds, test_ds;
  std::optional<Vocabulary> vocab;
  if (spec.input == InputKind::kGraph) {
    auto build = [](std::vector<SampleRecord> records) -> std::unique_ptr<Dataset> {
      if (records.empty()) return nullptr;
      return std::make_unique<PropagationGraphDataset>(std::move(records));
    };
    train_ds = build(std::move(train));
    val_ds = build(std::move(validation));
    test_ds = build(std::move(test));
    if (params.contains("feature_dim") && !user_set("model_params.feature_dim")) {
      params["feature_dim"] =
          static_cast<const PropagationGraphDataset&>(*train_ds).feature_dim();
    }
  } else {
    const std::size_t vocab_size =
        params.contains("vocab_size") ? params["vocab_size"].get<std::size_t>() : 5000;
    const std::size_t max_len = params.contains("max_len") ? params["max_len"].get<std::size_t>() : 64;
    std::vector<std::string> texts;
    for (const SampleRecord& r : train) {
      const json& t = r.fields.at(keys::kText);
      if (!t.is_string()) throw DataError("training records need a string 'text' field");
      texts.push_back(t.get<std::string>());
    }
    vocab = Vocabulary::build(texts, vocab_size);
    TokenizeFn tokenize = [v = *vocab, max_len](std::string_view text) {
      return reference_tokenize(text, v, max_len);
    };
    if (params.contains("num_domains") && train.front().has(keys::kDomain)) {
      const std::size_t domains = params["num_domains"].get<std::size_t>();
      check_domains(train, domains, "train");
      check_domains(validation, domains, "validation");
      check_domains(test, domains, "test");
    }
    const bool images = train.front().has(keys::kImage);
    auto build = [&](std::vector<SampleRecord> records) -> std::unique_ptr<Dataset> {
      if (records.empty()) return nullptr;
      if (images) {
        return std::make_unique<MultiModalDataset>(std::move(records), tokenize,
                                                   reference_transform);
      }
      return std::make_unique<TextDataset>(std::move(records), tokenize);
    };
    train_ds = build(std::move(train));
    val_ds = build(std::move(validation));
    test_ds = build(std::move(test));
  }

  // 4. Model and output directory.
  std::unique_ptr<AbstractModel> model = resolve_model(parsed.model, params);
  cfg["model_params"] = model->params();
  const std::filesystem::path out_dir = choose_output_dir(parsed, options.timestamped);
  cfg["trainer"]["output_dir"] = out_dir.string();
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream f(out_dir / "resolved_config.yaml");
    f << to_yaml(cfg) << '\n';
    if (!f) throw ConfigError(fmt::format("cannot write to {}", out_dir.string()));
  }
  if (vocab) vocab->save(out_dir / "vocab.txt");

  // 5. Batches.
  const std::size_t batch_size = parsed.batch_size;
  const std::uint64_t seed = parsed.trainer.seed;
  const Dataset& train_ref = *train_ds;
  BatchProvider train_batches = [&train_ref, batch_size, seed](int epoch) {
    return make_batches(train_ref, batch_size, true, seed + static_cast<std::uint64_t>(epoch));
  };
  std::vector<KeyedBatch> val_batches, test_batches;
  if (val_ds) val_batches = make_batches(*val_ds, batch_size, false, 0);
  if (test_ds) test_batches = make_batches(*test_ds, batch_size, false, 0);

  // 6. Train, then test the restored best model.
  TrainerConfig trainer_cfg = parsed.trainer;
  trainer_cfg.output_dir = out_dir;
  trainer_cfg.log_to_console = options.log_to_console;
  Trainer trainer(trainer_cfg);
  RunResult result;
  result.history = trainer.fit(*model, train_batches, val_ds ? &val_batches : nullptr);
  if (test_ds) {
    result.test_metrics = trainer.evaluate(*model, test_batches);
    std::ofstream f(out_dir / "test_metrics.json");
    f << result.test_metrics.to_json().dump(2) << '\n';
  }
  result.output_dir = out_dir;
  result.resolved = std::move(cfg);
  return result;
}

RunResult run_from_yaml(const std::filesystem::path& path, const RunOptions& options) {
  json doc = load_yaml(path);
  if (!doc.is_object()) throw ConfigError(fmt::format("{}: top level must be a mapping", path.string()));
  if (!doc.contains("model") || !doc["model"].is_string()) {
    throw ConfigError(fmt::format("{}: 'model' (a registered model name) is required",
                                  path.string()));
  }
  // Relative data paths are taken relative to the working directory, as
  // they would be when passed to run() directly.
  const std::string model = doc["model"].get<std::string>();
  return run(model, doc, options);
}

json parse_yaml(const std::string& text, const std::string& origin) {
  try {
    return yaml_to_json(YAML::Load(text), origin);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: YAML parse error: {}", origin, e.mark.line + 1, e.msg));
  }
}

json load_yaml(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_yaml(text, path.string());
}

std::string to_yaml(const json& document) {
  YAML::Emitter out;
  emit(out, document);
  return out.c_str();
}

}  // namespace fndkit
