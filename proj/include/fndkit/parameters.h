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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fndkit/autograd.h"

namespace fndkit {

// Named trainable arrays in registration order. The order is part of the
// checkpoint layout, so it must be deterministic for a given architecture.
class ParameterList {
 public:
  using Entry = std::pair<std::string, Var>;

  // Throws std::logic_error on a duplicate name.
  Var add(std::string name, Tensor init);

  std::size_t size() const { return entries_.size(); }
  std::size_t numel() const;
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  const Var* find(std::string_view name) const;
  const Var& at(std::string_view name) const;

  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

}  // namespace fndkit
