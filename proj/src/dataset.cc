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

#include "fndkit/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fndkit/error.h"

namespace fndkit {

namespace fs = std::filesystem;
using nlohmann::json;

int SampleRecord::label() const {
  const json& l = fields.at(keys::kLabel);
  return l.get<int>();
}

bool SampleRecord::has(std::string_view name) const {
  return fields.contains(std::string(name));
}

std::set<std::string> SampleRecord::field_names() const {
  std::set<std::string> names;
  for (const auto& item : fields.items()) names.insert(item.key());
  return names;
}

std::vector<SampleRecord> parse_json_records(const json& document,
                                             const std::set<std::string>& required_fields,
                                             const fs::path& base_dir) {
  if (!document.is_array()) {
    throw DataError(fmt::format("dataset must be a top-level JSON array, got {}",
                                document.type_name()));
  }
  std::vector<SampleRecord> records;
  records.reserve(document.size());
  std::set<std::string> first_fields;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const json& element = document[i];
    if (!element.is_object()) {
      throw DataError(fmt::format("element {}: expected an object, got {}", i,
                                  element.type_name()));
    }
    std::set<std::string> required = required_fields;
    required.insert(keys::kLabel);
    for (const std::string& field : required) {
      if (!element.contains(field)) {
        throw DataError(fmt::format("element {}: missing required field '{}'", i, field));
      }
    }
    if (!element.at(keys::kLabel).is_number_integer()) {
      throw DataError(fmt::format("element {}: field 'label' must be an integer, got {}", i,
                                  element.at(keys::kLabel).dump()));
    }
    for (const char* field : {keys::kDomain, keys::kEvent}) {
      if (element.contains(field) && !element.at(field).is_number_integer()) {
        throw DataError(fmt::format("element {}: field '{}' must be an integer", i, field));
      }
    }
    SampleRecord record{element};
    if (i == 0) {
      first_fields = record.field_names();
    } else if (record.field_names() != first_fields) {
      throw DataError(fmt::format("element {}: fields {{{}}} differ from element 0 {{{}}}", i,
                                  fmt::join(record.field_names(), ", "),
                                  fmt::join(first_fields, ", ")));
    }
    if (record.has(keys::kImage)) {
      json& image = record.fields[keys::kImage];
      if (!image.is_string()) {
        throw DataError(fmt::format("element {}: field 'image' must be a path string", i));
      }
      fs::path p = image.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) image = (base_dir / p).string();
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<SampleRecord> load_json_dataset(const fs::path& path,
                                            const std::set<std::string>& required_fields) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open dataset file '{}'", path.string()));
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  try {
    return parse_json_records(document, required_fields, path.parent_path());
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

Vocabulary Vocabulary::from_mapping(std::map<std::string, int> mapping) {
  Vocabulary vocab;
  for (auto& [token, id] : mapping) {
    if (id < 0) throw std::invalid_argument(fmt::format("negative id for token '{}'", token));
    vocab.size_ = std::max<std::size_t>(vocab.size_, static_cast<std::size_t>(id) + 1);
    vocab.ids_.emplace(token, id);
  }
  return vocab;
}

namespace {

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t max_size) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string_view token : split_whitespace(text)) ++counts[std::string(token)];
  }
  counts.erase(std::string(kPadToken));
  counts.erase(std::string(kUnknownToken));
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const std::size_t capacity = max_size > 2 ? max_size - 2 : 0;
  if (ranked.size() > capacity) ranked.resize(capacity);
  Vocabulary vocab;
  int next = 2;
  for (const auto& [token, count] : ranked) vocab.ids_.emplace(token, next++);
  vocab.size_ = static_cast<std::size_t>(next);
  return vocab;
}

Vocabulary Vocabulary::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open vocabulary '{}'", path.string()));
  Vocabulary vocab;
  std::string line;
  int id = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (id >= 2 && !line.empty()) vocab.ids_.emplace(line, id);
    ++id;
  }
  vocab.size_ = std::max(2, id);
  return vocab;
}

void Vocabulary::save(const fs::path& path) const {
  std::vector<std::string> by_id(size_);
  by_id[kPadId] = std::string(kPadToken);
  by_id[kUnknownId] = std::string(kUnknownToken);
  for (const auto& [token, id] : ids_) {
    if (id >= 2) by_id[static_cast<std::size_t>(id)] = token;
  }
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write vocabulary '{}'", path.string()));
  for (const std::string& token : by_id) out << token << '\n';
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknownId : it->second;
}

TokenSequence reference_tokenize(std::string_view text, const Vocabulary& vocab,
                                 std::size_t max_len) {
  if (vocab.empty()) throw std::invalid_argument("reference_tokenize: empty vocabulary");
  if (max_len == 0) throw std::invalid_argument("reference_tokenize: max_len must be >= 1");
  TokenSequence seq{std::vector<int>(max_len, Vocabulary::kPadId), std::vector<int>(max_len, 0)};
  std::size_t i = 0;
  for (std::string_view token : split_whitespace(text)) {
    if (i == max_len) break;
    seq.ids[i] = vocab.id(token);
    seq.mask[i] = 1;
    ++i;
  }
  return seq;
}

namespace {

// Skips whitespace and '#' comments in a PPM header.
void skip_header_space(std::istream& in) {
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_header_number(std::istream& in, const fs::path& path, const char* what) {
  skip_header_space(in);
  long long value = -1;
  if (!(in >> value) || value <= 0) {
    throw DataError(fmt::format("'{}': invalid PPM {}", path.string(), what));
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

Tensor reference_transform(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open image '{}'", path.string()));
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '6') {
    throw DataError(fmt::format("'{}': unsupported image format (expected binary PPM 'P6')",
                                path.string()));
  }
  const std::size_t width = read_header_number(in, path, "width");
  const std::size_t height = read_header_number(in, path, "height");
  const std::size_t maxval = read_header_number(in, path, "maxval");
  if (maxval != 255) {
    throw DataError(fmt::format("'{}': only 8-bit PPM (maxval 255) is supported, got {}",
                                path.string(), maxval));
  }
  in.get();  // the single whitespace byte that ends the header
  const std::size_t expected = width * height * 3;
  std::vector<char> payload(std::istreambuf_iterator<char>(in), {});
  if (payload.size() != expected) {
    throw DataError(fmt::format("'{}': payload has {} bytes, {}x{} RGB needs {}",
                                path.string(), payload.size(), width, height, expected));
  }
  Tensor image({3, width, height});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const auto byte = static_cast<unsigned char>(payload[(y * width + x) * 3 + c]);
        image[(c * width + x) * height + y] = static_cast<double>(byte) / 255.0;
      }
    }
  }
  return image;
}

void write_ppm(const fs::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb) {
  if (rgb.size() != width * height * 3) {
    throw std::invalid_argument("write_ppm: pixel buffer size does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write image '{}'", path.string()));
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

KeyedBatch::KeyedBatch(std::size_t batch_size) : batch_size_(batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

void KeyedBatch::set(std::string key, Tensor value) {
  if (value.rank() == 0 || value.dim(0) != batch_size_) {
    throw std::invalid_argument(fmt::format("feature '{}' has shape {}, batch size is {}", key,
                                            shape_string(value.shape()), batch_size_));
  }
  features_.insert_or_assign(std::move(key), std::move(value));
}

const Tensor& KeyedBatch::at(std::string_view key) const {
  auto it = features_.find(key);
  if (it == features_.end()) {
    throw ModelError(fmt::format("batch is missing feature key '{}'", key));
  }
  return it->second;
}

bool KeyedBatch::contains(std::string_view key) const {
  return features_.find(key) != features_.end();
}

std::vector<std::string> KeyedBatch::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : features_) out.push_back(k);
  return out;
}

namespace {

// Numeric JSON -> tensor: scalars give rank 0, flat numeric arrays rank 1.
std::optional<Tensor> numeric_field(const json& value) {
  if (value.is_boolean()) return Tensor::scalar(value.get<bool>() ? 1.0 : 0.0);
  if (value.is_number()) return Tensor::scalar(value.get<double>());
  if (value.is_array() && !value.empty() &&
      std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); })) {
    std::vector<double> values;
    values.reserve(value.size());
    for (const json& v : value) values.push_back(v.get<double>());
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }
  return std::nullopt;
}

Tensor int_vector(const std::vector<int>& v) {
  return Tensor({v.size()}, std::vector<double>(v.begin(), v.end()));
}

}  // namespace

TextDataset::TextDataset(std::vector<SampleRecord> records, TokenizeFn tokenize,
                         TextDatasetOptions options)
    : records_(std::move(records)), text_field_(std::move(options.text_field)) {
  if (!tokenize) throw std::invalid_argument("TextDataset needs a tokenize function");
  tokenized_.reserve(records_.size());
  labels_.reserve(records_.size());
  auxiliary_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SampleRecord& r = records_[i];
    if (!r.has(text_field_) || !r.fields.at(text_field_).is_string()) {
      throw DataError(fmt::format("record {}: missing string field '{}'", i, text_field_));
    }
    const int label = r.label();
    if (label < 0 || label >= options.num_classes) {
      throw DataError(fmt::format("record {}: label {} outside [0, {})", i, label,
                                  options.num_classes));
    }
    for (const char* field : {keys::kDomain, keys::kEvent}) {
      if (r.has(field) && r.fields.at(field).get<long long>() < 0) {
        throw DataError(fmt::format("record {}: negative '{}'", i, field));
      }
    }
    tokenized_.push_back(tokenize(r.fields.at(text_field_).get_ref<const std::string&>()));
    labels_.push_back(label);
    std::map<std::string, Tensor, std::less<>> aux;
    for (const auto& item : r.fields.items()) {
      const std::string& name = item.key();
      if (name == text_field_ || name == keys::kLabel || name == keys::kImage) continue;
      if (auto t = numeric_field(item.value())) aux.emplace(name, std::move(*t));
    }
    auxiliary_.push_back(std::move(aux));
  }
}

void TextDataset::check_index(std::size_t index) const {
  if (index >= records_.size()) {
    throw std::out_of_range(fmt::format("index {} out of range for dataset of size {}", index,
                                        records_.size()));
  }
}

Sample TextDataset::get(std::size_t index) const {
  check_index(index);
  Sample sample(auxiliary_[index].begin(), auxiliary_[index].end());
  sample.insert_or_assign(keys::kTokenIds, int_vector(tokenized_[index].ids));
  sample.insert_or_assign(keys::kTokenMask, int_vector(tokenized_[index].mask));
  sample.insert_or_assign(keys::kLabel, Tensor::scalar(labels_[index]));
  sample.insert_or_assign(keys::kIndex, Tensor::scalar(static_cast<double>(index)));
  return sample;
}

MultiModalDataset::MultiModalDataset(std::vector<SampleRecord> records, TokenizeFn tokenize,
                                     TransformFn transform, std::string image_field,
                                     TextDatasetOptions options)
    : TextDataset(std::move(records), std::move(tokenize), std::move(options)),
      transform_(std::move(transform)) {
  if (!transform_) throw std::invalid_argument("MultiModalDataset needs a transform function");
  image_paths_.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const SampleRecord& r = TextDataset::records()[i];
    if (!r.has(image_field) || !r.fields.at(image_field).is_string()) {
      throw DataError(fmt::format("record {}: missing image path field '{}'", i, image_field));
    }
    image_paths_.emplace_back(r.fields.at(image_field).get<std::string>());
  }
}

Sample MultiModalDataset::get(std::size_t index) const {
  Sample sample = TextDataset::get(index);
  const fs::path& path = image_paths_[index];
  Tensor image;
  try {
    image = transform_(path);
  } catch (const std::exception& e) {
    throw DataError(fmt::format("transform failed for image '{}': {}", path.string(), e.what()));
  }
  sample.insert_or_assign(keys::kImage, std::move(image));
  return sample;
}

PropagationGraphDataset::PropagationGraphDataset(std::vector<SampleRecord> records,
                                                 int num_classes) {
  graphs_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& f = records[i].fields;
    auto fail = [i](const std::string& what) {
      return DataError(fmt::format("graph {}: {}", i, what));
    };
    for (const char* field : {keys::kNodeFeatures, keys::kEdges, keys::kRoot}) {
      if (!f.contains(field)) throw fail(fmt::format("missing field '{}'", field));
    }
    const json& nodes = f.at(keys::kNodeFeatures);
    if (!nodes.is_array() || nodes.empty()) throw fail("node_features must be a non-empty array");
    const std::size_t n = nodes.size();
    const std::size_t width = nodes[0].is_array() ? nodes[0].size() : 0;
    if (width == 0) throw fail("node feature rows must be non-empty arrays");
    if (feature_dim_ == 0) feature_dim_ = width;
    if (width != feature_dim_) {
      throw fail(fmt::format("feature width {} differs from {}", width, feature_dim_));
    }
    Graph g;
    g.node_features = Tensor({n, width});
    for (std::size_t v = 0; v < n; ++v) {
      if (!nodes[v].is_array() || nodes[v].size() != width) {
        throw fail(fmt::format("node {} has a malformed feature row", v));
      }
      for (std::size_t j = 0; j < width; ++j) {
        if (!nodes[v][j].is_number()) throw fail(fmt::format("node {} feature {} not numeric", v, j));
        g.node_features[v * width + j] = nodes[v][j].get<double>();
      }
    }
    const json& edges = f.at(keys::kEdges);
    if (!edges.is_array()) throw fail("edges must be an array");
    g.edges = Tensor({edges.size(), 2});
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const json& pair = edges[e];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer()) {
        throw fail(fmt::format("edge {} must be an integer pair", e));
      }
      for (std::size_t s = 0; s < 2; ++s) {
        const long long node = pair[s].get<long long>();
        if (node < 0 || node >= static_cast<long long>(n)) {
          throw fail(fmt::format("edge {} references node {} outside [0, {})", e, node, n));
        }
        g.edges[e * 2 + s] = static_cast<double>(node);
      }
    }
    if (!f.at(keys::kRoot).is_number_integer()) throw fail("root must be an integer");
    const long long root = f.at(keys::kRoot).get<long long>();
    if (root < 0 || root >= static_cast<long long>(n)) {
      throw fail(fmt::format("root {} outside [0, {})", root, n));
    }
    g.root = static_cast<int>(root);
    g.label = records[i].label();
    if (g.label < 0 || g.label >= num_classes) {
      throw fail(fmt::format("label {} outside [0, {})", g.label, num_classes));
    }
    graphs_.push_back(std::move(g));
  }
}

Sample PropagationGraphDataset::get(std::size_t index) const {
  if (index >= graphs_.size()) {
    throw std::out_of_range(fmt::format("index {} out of range for dataset of size {}", index,
                                        graphs_.size()));
  }
  const Graph& g = graphs_[index];
  Sample sample;
  sample.emplace(keys::kNodeFeatures, g.node_features);
  sample.emplace(keys::kNodeMask, Tensor({g.node_features.dim(0)}, 1.0));
  sample.emplace(keys::kEdges, g.edges);
  sample.emplace(keys::kEdgeCount, Tensor::scalar(static_cast<double>(g.edges.dim(0))));
  sample.emplace(keys::kRoot, Tensor::scalar(g.root));
  sample.emplace(keys::kLabel, Tensor::scalar(g.label));
  sample.emplace(keys::kIndex, Tensor::scalar(static_cast<double>(index)));
  return sample;
}

namespace detail {

std::pair<std::size_t, std::size_t> split_sizes(std::size_t n, const SplitRatios& ratios) {
  for (double r : {ratios.train, ratios.validation, ratios.test}) {
    if (!(r > 0.0)) throw std::invalid_argument(fmt::format("split ratio {} must be > 0", r));
  }
  const double total = ratios.train + ratios.validation + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("split ratios sum to {}, expected 1", total));
  }
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  auto portion = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t n_train = std::min(portion(ratios.train), n);
  const std::size_t n_val = std::min(portion(ratios.validation), n - n_train);
  return {n_train, n_val};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace detail

namespace {

// Copies `src` (shape `from`) into the zero-initialised `dst` (shape `to`).
void copy_padded(const double* src, const Shape& from, double* dst, const Shape& to,
                 std::size_t axis = 0) {
  if (from.empty()) {
    *dst = *src;
    return;
  }
  if (axis + 1 == from.size()) {
    std::copy_n(src, from[axis], dst);
    return;
  }
  std::size_t src_stride = 1;
  std::size_t dst_stride = 1;
  for (std::size_t a = axis + 1; a < from.size(); ++a) {
    src_stride *= from[a];
    dst_stride *= to[a];
  }
  for (std::size_t i = 0; i < from[axis]; ++i) {
    copy_padded(src + i * src_stride, from, dst + i * dst_stride, to, axis + 1);
  }
}

}  // namespace

KeyedBatch collate(std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("collate: no samples");
  KeyedBatch batch(samples.size());
  for (const auto& [key, first] : samples[0]) {
    Shape inner = first.shape();
    for (const Sample& s : samples) {
      auto it = s.find(key);
      if (it == s.end()) throw DataError(fmt::format("collate: sample lacks feature '{}'", key));
      const Shape& shape = it->second.shape();
      if (shape.size() != inner.size()) {
        throw DataError(fmt::format("collate: feature '{}' changes rank across samples", key));
      }
      for (std::size_t a = 0; a < shape.size(); ++a) inner[a] = std::max(inner[a], shape[a]);
    }
    Shape out_shape{samples.size()};
    out_shape.insert(out_shape.end(), inner.begin(), inner.end());
    Tensor stacked(out_shape);
    const std::size_t stride = shape_numel(inner);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Tensor& t = samples[i].find(key)->second;
      if (t.shape() == inner) {
        std::copy_n(t.data(), stride, stacked.data() + i * stride);
      } else if (t.size() > 0) {
        copy_padded(t.data(), t.shape(), stacked.data() + i * stride, inner);
      }
    }
    batch.set(key, std::move(stacked));
  }
  return batch;
}

std::vector<KeyedBatch> make_batches(const Dataset& dataset, std::size_t batch_size, bool shuffle,
                                     std::uint64_t seed) {
  if (batch_size == 0) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  if (dataset.size() == 0) throw DataError("make_batches: dataset is empty");
  std::vector<std::size_t> order;
  if (shuffle) {
    order = detail::shuffled_indices(dataset.size(), seed);
  } else {
    order.resize(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  std::vector<KeyedBatch> batches;
  batches.reserve((order.size() + batch_size - 1) / batch_size);
  std::vector<Sample> chunk;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    chunk.clear();
    for (std::size_t i = start; i < stop; ++i) chunk.push_back(dataset.get(order[i]));
    batches.push_back(collate(chunk));
  }
  return batches;
}

}  // namespace fndkit
