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

#ifndef GME_CLI_COMMANDS_HPP_
#define GME_CLI_COMMANDS_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "gme/cli/config.hpp"

namespace gme::cli {

// File layout of one run directory.
struct RunPaths {
  std::string data_dir, checkpoints_dir;
  std::string train, valid, valid_cases, test_cases, lexicon, stats;
  std::string attribution_ckpt, maskgen_ckpt, recombiner_ckpt;
  std::string train_summary;
};
RunPaths run_paths(const RunConfig& config);

// Guards the output directory against concurrent commands.
class OutputLock {
 public:
  explicit OutputLock(const std::string& output_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

// Throws ConfigError listing every validation failure.
void validate_or_throw(const RunConfig& config);

// Generates or loads the corpus, applies the leakage filter (and optionally
// editing-persona selection), and writes stats.json.
nlohmann::json cmd_prepare_data(const RunConfig& config);

// Attribution model first, then mask generator and recombiner; writes
// manifested checkpoints, loss traces, and a summary.
nlohmann::json cmd_train(const RunConfig& config);

struct EditSummary {
  std::size_t case_count = 0;
  std::size_t failure_count = 0;
  std::string results_path;
};
EditSummary cmd_edit(const RunConfig& config, const std::string& cases_path,
                     const std::string& results_path);

// Scores one or more (seed-tagged) result files against the cases; with
// no_edit the original responses are scored instead.
nlohmann::json cmd_evaluate(const RunConfig& config, const std::string& cases_path,
                            const std::vector<std::string>& results_paths,
                            const std::string& report_path, bool no_edit = false);

// prepare-data + train + edit + evaluate in one go on the synthetic corpus.
nlohmann::json cmd_reproduce_synthetic(const RunConfig& config);

}  // namespace gme::cli

#endif  // GME_CLI_COMMANDS_HPP_
