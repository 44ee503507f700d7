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

#include "fndkit/checkpoint.h"

#include <bit>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "fndkit/error.h"

namespace fndkit {

namespace {

constexpr std::string_view kMagic = "FNDCKPT1\n";
constexpr std::uint8_t kFloat64 = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::string str(std::uint64_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw CheckpointError(fmt::format("{}: malformed checkpoint ({})", path_.string(), what));
  }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) fail("truncated");
  }
  const std::string& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const AbstractModel& model, const std::filesystem::path& path, int epoch) {
  const ModelParams& params = model.params();
  nlohmann::json manifest = {{"model", model.name()}, {"params", params}, {"epoch", epoch}};
  manifest["seed"] = params.is_object() && params.contains("seed") ? params["seed"] : nlohmann::json(0);

  std::string out(kMagic);
  const std::string text = manifest.dump();
  put_u64(out, text.size());
  out += text;
  put_u64(out, model.parameters().size());
  for (const auto& [name, var] : model.parameters()) {
    const Tensor& t = var.value();
    put_u64(out, name.size());
    out += name;
    out.push_back(static_cast<char>(kFloat64));
    put_u64(out, t.rank());
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }

  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  // Write to a sibling and rename so a crash never leaves a half-written file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError(fmt::format("cannot write checkpoint {}", path.string()));
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError(fmt::format("failed writing checkpoint {}", path.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError(fmt::format("cannot move checkpoint into {}: {}", path.string(),
                                            ec.message()));
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(fmt::format("checkpoint not found: {}", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(bytes, path);
  if (r.str(kMagic.size()) != kMagic) r.fail("bad magic");

  CheckpointData data;
  try {
    const nlohmann::json manifest = nlohmann::json::parse(r.str(r.u64()));
    data.manifest.model = manifest.at("model").get<std::string>();
    data.manifest.params = manifest.at("params");
    data.manifest.seed = manifest.at("seed").get<std::uint64_t>();
    data.manifest.epoch = manifest.at("epoch").get<int>();
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("manifest: ") + e.what());
  }
  const std::uint64_t count = r.u64();
  for (std::uint64_t a = 0; a < count; ++a) {
    std::string name = r.str(r.u64());
    if (r.u8() != kFloat64) r.fail("unsupported dtype for " + name);
    const std::uint64_t rank = r.u64();
    if (rank > 8) r.fail("implausible rank for " + name);
    Shape shape;
    for (std::uint64_t d = 0; d < rank; ++d) shape.push_back(r.u64());
    std::vector<double> values(shape_numel(shape));
    for (double& v : values) v = std::bit_cast<double>(r.u64());
    data.arrays.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) r.fail("trailing bytes");
  return data;
}

void load_parameters(AbstractModel& model, const CheckpointData& data) {
  ParameterList& params = model.parameters();
  if (data.arrays.size() != params.size()) {
    throw CheckpointError(fmt::format("checkpoint holds {} arrays, model '{}' has {} parameters",
                                      data.arrays.size(), model.name(), params.size()));
  }
  // Validate everything before touching any parameter.
  std::size_t i = 0;
  for (const auto& [name, var] : params) {
    const auto& [saved_name, saved] = data.arrays[i++];
    if (saved_name != name) {
      throw CheckpointError(
          fmt::format("parameter name mismatch: checkpoint '{}' vs model '{}'", saved_name, name));
    }
    if (saved.shape() != var.shape()) {
      throw CheckpointError(fmt::format("shape mismatch for '{}': checkpoint {} vs model {}", name,
                                        shape_string(saved.shape()), shape_string(var.shape())));
    }
  }
  i = 0;
  for (auto& [name, var] : params) var.mutable_value() = data.arrays[i++].second;
}

void restore_checkpoint(AbstractModel& model, const std::filesystem::path& path) {
  load_parameters(model, read_checkpoint(path));
}

std::unique_ptr<AbstractModel> load_checkpoint(const std::filesystem::path& path) {
  CheckpointData data = read_checkpoint(path);
  std::unique_ptr<AbstractModel> model;
  try {
    model = resolve_model(data.manifest.model, data.manifest.params);
  } catch (const ConfigError& e) {
    throw CheckpointError(fmt::format("{}: cannot rebuild model: {}", path.string(), e.what()));
  }
  load_parameters(*model, data);
  return model;
}

}  // namespace fndkit
