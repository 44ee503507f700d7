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
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fndkit/tensor.h"

namespace fndkit {

// Canonical feature names shared by datasets, models and the trainer.
namespace keys {
inline constexpr const char* kTokenIds = "token_ids";
inline constexpr const char* kTokenMask = "token_mask";
inline constexpr const char* kLabel = "label";
inline constexpr const char* kDomain = "domain";
inline constexpr const char* kEvent = "event";
inline constexpr const char* kImage = "image";
inline constexpr const char* kImageFeature = "image_feature";
inline constexpr const char* kIndex = "index";
inline constexpr const char* kNodeFeatures = "node_features";
inline constexpr const char* kNodeMask = "node_mask";
inline constexpr const char* kEdges = "edges";
inline constexpr const char* kEdgeCount = "edge_count";
inline constexpr const char* kRoot = "root";
inline constexpr const char* kText = "text";
}  // namespace keys

// One post as named JSON fields. "label" is always present and integral.
struct SampleRecord {
  nlohmann::json fields;

  int label() const;
  bool has(std::string_view name) const;
  std::set<std::string> field_names() const;
};

// Reads a top-level JSON array of objects. Relative "image" paths are
// resolved against the file's directory. Errors name the element index.
std::vector<SampleRecord> load_json_dataset(const std::filesystem::path& path,
                                            const std::set<std::string>& required_fields = {
                                                keys::kLabel});
std::vector<SampleRecord> parse_json_records(const nlohmann::json& document,
                                             const std::set<std::string>& required_fields,
                                             const std::filesystem::path& base_dir = {});

// Token -> id table. Id 0 is padding, id 1 the unknown marker.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnknownId = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary() = default;

  static Vocabulary from_mapping(std::map<std::string, int> mapping);
  // Most frequent whitespace tokens first (ties broken lexicographically),
  // capped so that size() <= max_size.
  static Vocabulary build(std::span<const std::string> texts, std::size_t max_size);
  // One token per line, line number = id; lines 0 and 1 are reserved.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  int id(std::string_view token) const;
  // One past the largest id.
  std::size_t size() const { return size_; }
  bool empty() const { return ids_.empty(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::size_t size_ = 2;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> mask;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Whitespace split, vocabulary lookup (unknown -> 1), truncate/pad to max_len.
TokenSequence reference_tokenize(std::string_view text, const Vocabulary& vocab,
                                 std::size_t max_len);

// Binary PPM (P6, maxval 255) -> [3, width, height] scaled into [0, 1].
Tensor reference_transform(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb);

using Sample = std::map<std::string, Tensor, std::less<>>;

// Feature name -> array whose leading dimension is the batch size.
class KeyedBatch {
 public:
  KeyedBatch() = default;
  explicit KeyedBatch(std::size_t batch_size);

  // Throws std::invalid_argument if the leading dimension disagrees.
  void set(std::string key, Tensor value);
  // Throws ModelError naming the key when absent.
  const Tensor& at(std::string_view key) const;
  bool contains(std::string_view key) const;

  std::size_t batch_size() const { return batch_size_; }
  std::vector<std::string> keys() const;
  const std::map<std::string, Tensor, std::less<>>& features() const { return features_; }

 private:
  std::size_t batch_size_ = 0;
  std::map<std::string, Tensor, std::less<>> features_;
};

class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  // Throws std::out_of_range for index >= size().
  virtual Sample get(std::size_t index) const = 0;
};

using TokenizeFn = std::function<TokenSequence(std::string_view)>;
using TransformFn = std::function<Tensor(const std::filesystem::path&)>;

struct TextDatasetOptions {
  std::string text_field = keys::kText;
  int num_classes = 2;
};

// Tokenizes every record eagerly at construction. Numeric auxiliary fields
// (integers, numbers, flat numeric arrays) are carried into samples under
// their own names; other fields are dropped.
class TextDataset : public Dataset {
 public:
  TextDataset(std::vector<SampleRecord> records, TokenizeFn tokenize,
              TextDatasetOptions options = {});

  std::size_t size() const override { return records_.size(); }
  Sample get(std::size_t index) const override;

  const std::vector<SampleRecord>& records() const { return records_; }
  const std::vector<TokenSequence>& tokenized() const { return tokenized_; }
  const std::vector<int>& labels() const { return labels_; }

 protected:
  void check_index(std::size_t index) const;

 private:
  std::vector<SampleRecord> records_;
  std::vector<TokenSequence> tokenized_;
  std::vector<int> labels_;
  std::vector<std::map<std::string, Tensor, std::less<>>> auxiliary_;
  std::string text_field_;
};

// Text handled as in TextDataset; images are kept as paths and decoded by
// `transform` on every access. Nothing is cached.
class MultiModalDataset : public TextDataset {
 public:
  MultiModalDataset(std::vector<SampleRecord> records, TokenizeFn tokenize,
                    TransformFn transform, std::string image_field = keys::kImage,
                    TextDatasetOptions options = {});

  Sample get(std::size_t index) const override;

  const std::vector<std::filesystem::path>& image_paths() const { return image_paths_; }

 private:
  TransformFn transform_;
  std::vector<std::filesystem::path> image_paths_;
};

// Propagation trees: "node_features" (N x F), "edges" ([parent, child]
// pairs), "root" and "label" per record.
class PropagationGraphDataset : public Dataset {
 public:
  explicit PropagationGraphDataset(std::vector<SampleRecord> records, int num_classes = 2);

  std::size_t size() const override { return graphs_.size(); }
  Sample get(std::size_t index) const override;

  std::size_t feature_dim() const { return feature_dim_; }

 private:
  struct Graph {
    Tensor node_features;
    Tensor edges;
    int root = 0;
    int label = 0;
  };
  std::vector<Graph> graphs_;
  std::size_t feature_dim_ = 0;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

template <typename T>
struct DataSplit {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;
};

namespace detail {
// Validates ratios and returns (train, validation) sizes for n items.
std::pair<std::size_t, std::size_t> split_sizes(std::size_t n, const SplitRatios& ratios);
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);
}  // namespace detail

// Shuffle by seed, then take floor(n * r_train), floor(n * r_val) and the rest.
template <typename T>
DataSplit<T> split_data(std::vector<T> records, const SplitRatios& ratios, std::uint64_t seed) {
  const auto [n_train, n_val] = detail::split_sizes(records.size(), ratios);
  const std::vector<std::size_t> order = detail::shuffled_indices(records.size(), seed);
  DataSplit<T> out;
  out.train.reserve(n_train);
  out.validation.reserve(n_val);
  out.test.reserve(records.size() - n_train - n_val);
  for (std::size_t i = 0; i < order.size(); ++i) {
    T& item = records[order[i]];
    if (i < n_train) {
      out.train.push_back(std::move(item));
    } else if (i < n_train + n_val) {
      out.validation.push_back(std::move(item));
    } else {
      out.test.push_back(std::move(item));
    }
  }
  return out;
}

// Stacks samples along a new leading axis. Arrays whose per-sample shapes
// differ (variable-size graphs) are zero-padded to the largest extent.
KeyedBatch collate(std::span<const Sample> samples);

std::vector<KeyedBatch> make_batches(const Dataset& dataset, std::size_t batch_size,
                                     bool shuffle, std::uint64_t seed);

}  // namespace fndkit
