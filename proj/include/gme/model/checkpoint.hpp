// Copyright 2026 The GME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GME_MODEL_CHECKPOINT_HPP_
#define GME_MODEL_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "gme/model/transformer.hpp"

namespace gme::model {

// Checkpoint directory layout: manifest.json (kind, model config, vocabulary,
// vocabulary hash, seed, step count, module extras) + params.bin (raw doubles).

void write_manifest(const std::string& dir, const nlohmann::json& manifest);
nlohmann::json read_manifest(const std::string& dir);

void write_params(const std::string& dir, const std::vector<double>& values);
std::vector<double> read_params(const std::string& dir, std::size_t expected_count);

nlohmann::json core_config_to_json(const CoreConfig& config);
CoreConfig core_config_from_json(const nlohmann::json& j);

}  // namespace gme::model

#endif  // GME_MODEL_CHECKPOINT_HPP_
