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

#ifndef GME_CLI_CONFIG_HPP_
#define GME_CLI_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gme/model/trainer.hpp"
#include "gme/model/transformer.hpp"
#include "gme/model/vocab.hpp"
#include "gme/templating/template.hpp"

namespace gme::cli {

struct CorpusConfig {
  std::string source = "synthetic";  // "synthetic" | "files"
  // files mode
  std::string train_path;
  std::string valid_path;
  std::string valid_cases_path;
  std::string test_cases_path;
  std::string lexicon_path;
  std::string select_pool_path;  // optional persona pool for editing-persona selection
  // synthetic mode
  std::size_t synthetic_train = 2000;
  std::size_t synthetic_valid = 200;
  std::size_t synthetic_test = 500;
  double leak_rate = 0.02;
};

struct StageConfig {
  model::CoreConfig core;
  model::TrainLoopConfig train;
};

struct NliConfig {
  std::string backend = "rule-oracle";  // "rule-oracle" | "external"
  std::string resource;                 // lexicon path or command
};

struct EvalConfig {
  bool med_persona_min = false;
  std::string lm_scorer_command;
};

// Everything a run needs; seeds are explicit and all paths resolve at
// validation time.
struct RunConfig {
  std::string output_dir = "runs/out";
  std::uint64_t seed = 7;
  int threads = 1;

  CorpusConfig corpus;
  templating::TemplateSamplerConfig sampler;  // delta, tau, noise_rate
  double epsilon = templating::kEpsilonMain;
  double label_smoothing = 0.1;
  int max_decode_length = 64;
  double failure_rate_cap = 0.1;
  bool strict_copy = false;

  StageConfig attribution;
  StageConfig recombiner;
  StageConfig maskgen;

  bool select_by_average = true;
  std::size_t average_cases = 64;  // validation cases scored per evaluation

  NliConfig nli;
  EvalConfig eval;
};

// Desk-scale defaults sized for a laptop CPU run of the whole pipeline.
RunConfig desk_scale_defaults();

// Key/value-with-sections config file.
RunConfig load_config(const std::string& path);
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);
std::string render_config(const RunConfig& config);

// All validation failures at once.
std::vector<std::string> validate(const RunConfig& config);

}  // namespace gme::cli

#endif  // GME_CLI_CONFIG_HPP_
