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

#include "gme/model/checkpoint.hpp"

#include <filesystem>
#include <fstream>

#include "gme/common/error.hpp"

namespace gme::model {

void write_manifest(const std::string& dir, const nlohmann::json& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

nlohmann::json read_manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw IoError("no manifest.json in " + dir);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid manifest: ") + e.what());
  }
  return j;
}

void write_params(const std::string& dir, const std::vector<double>& values) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/params.bin", std::ios::binary);
  if (!out) throw IoError("cannot write params in " + dir);
  std::uint64_t n = values.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_params(const std::string& dir, std::size_t expected_count) {
  std::ifstream in(dir + "/params.bin", std::ios::binary);
  if (!in) throw IoError("no params.bin in " + dir);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (n != expected_count) {
    throw ConfigError("checkpoint has " + std::to_string(n) + " parameters, expected " +
                      std::to_string(expected_count));
  }
  std::vector<double> values(n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("truncated params.bin in " + dir);
  return values;
}

nlohmann::json core_config_to_json(const CoreConfig& config) {
  return {{"vocab_size", config.vocab_size}, {"n_ctx", config.n_ctx},
          {"d_model", config.d_model},       {"n_layers", config.n_layers},
          {"n_heads", config.n_heads},       {"d_ff", config.d_ff},
          {"n_token_types", config.n_token_types}, {"causal", config.causal},
          {"tied_lm", config.tied_lm}};
}

CoreConfig core_config_from_json(const nlohmann::json& j) {
  CoreConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.n_ctx = j.at("n_ctx").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.n_token_types = j.at("n_token_types").get<int>();
  c.causal = j.at("causal").get<bool>();
  c.tied_lm = j.value("tied_lm", true);
  return c;
}

}  // namespace gme::model
