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

#include "fndkit/models.h"

namespace fndkit {

void register_builtin_models(ModelRegistry& registry) {
  registry.register_model("textcnn", {build_textcnn, {keys::kText, keys::kLabel}, InputKind::kText});
  registry.register_model(
      "mdfend", {build_mdfend, {keys::kText, keys::kLabel, keys::kDomain}, InputKind::kText});
  registry.register_model("eann", {build_eann,
                                   {keys::kText, keys::kLabel, keys::kEvent, keys::kImageFeature},
                                   InputKind::kText});
  registry.register_model(
      "bigcn",
      {build_bigcn_lite, {keys::kNodeFeatures, keys::kEdges, keys::kRoot, keys::kLabel},
       InputKind::kGraph});
  registry.register_model("toytext",
                          {build_toy_text_model, {keys::kText, keys::kLabel}, InputKind::kText});
}

}  // namespace fndkit
