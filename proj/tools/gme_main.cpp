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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gme/cli/commands.hpp"
#include "gme/common/error.hpp"
#include "gme/eval/report.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> tau;
  std::optional<std::string> output;
};

gme::cli::RunConfig resolve_config(const GlobalFlags& flags) {
  gme::cli::RunConfig config = flags.config_path.empty()
                                   ? gme::cli::desk_scale_defaults()
                                   : gme::cli::load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.epsilon) config.epsilon = *flags.epsilon;
  if (flags.tau) config.sampler.tau = *flags.tau;
  if (flags.output) config.output_dir = *flags.output;
  return config;
}

void print_report_summary(const nlohmann::json& report) {
  const auto& agg = report.at("aggregate");
  auto line = [&](const char* key, const char* label) {
    if (agg.contains(key) && !agg.at(key).is_null()) {
      double mean = agg.at(key).at("mean").get<double>();
      double sd = agg.at(key).at("stddev").get<double>();
      std::cout << "  " << label << ": " << gme::eval::format_score(mean) << " ("
                << gme::eval::format_score(sd) << ")\n";
    }
  };
  line("bleu", "BLEU");
  line("p_score", "P-Score");
  line("average", "Average");
  line("f1", "F1");
  line("nll", "NLL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gme: grounded minimal editing of persona-grounded dialogue responses"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Config file (key/value with sections)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the run seed");
  double epsilon_value = 0.0;
  auto* epsilon_opt =
      app.add_option("--epsilon", epsilon_value, "Mask confidence threshold override");
  double tau_value = 0.0;
  auto* tau_opt = app.add_option("--tau", tau_value, "Sentence-deletion temperature override");
  std::string output_value;
  auto* output_opt = app.add_option("--output", output_value, "Output directory override");

  auto* prepare = app.add_subcommand("prepare-data", "Generate or load the corpus");
  auto* train = app.add_subcommand("train", "Train attribution, mask generator, recombiner");
  auto* edit = app.add_subcommand("edit", "Edit a file of cases with trained checkpoints");
  auto* evaluate = app.add_subcommand("evaluate", "Score result files against cases");
  auto* reproduce =
      app.add_subcommand("reproduce-synthetic", "Full desk-scale pipeline on synthetic data");

  std::string edit_cases_path, edit_out_path;
  edit->add_option("--cases", edit_cases_path, "Edit-case file (default: prepared test cases)");
  edit->add_option("--out", edit_out_path, "Result file (default: <output>/results.jsonl)");

  std::string eval_cases_path, eval_report_path;
  std::vector<std::string> eval_results;
  bool eval_no_edit = false;
  evaluate->add_option("--cases", eval_cases_path, "Edit-case file");
  evaluate->add_option("--results", eval_results, "One result file per seed");
  evaluate->add_option("--report", eval_report_path, "Report path (default: <output>/report.json)");
  evaluate->add_flag("--no-edit", eval_no_edit, "Score the original responses instead");

  CLI11_PARSE(app, argc, argv);

  if (*seed_opt) flags.seed = seed_value;
  if (*epsilon_opt) flags.epsilon = epsilon_value;
  if (*tau_opt) flags.tau = tau_value;
  if (*output_opt) flags.output = output_value;

  try {
    gme::cli::RunConfig config = resolve_config(flags);
    gme::cli::RunPaths paths = gme::cli::run_paths(config);

    if (prepare->parsed()) {
      auto stats = gme::cli::cmd_prepare_data(config);
      std::cout << "prepared data under " << paths.data_dir << "\n"
                << stats.dump(2) << "\n";
    } else if (train->parsed()) {
      auto summary = gme::cli::cmd_train(config);
      std::cout << "checkpoints under " << paths.checkpoints_dir << "\n"
                << summary.dump(2) << "\n";
    } else if (edit->parsed()) {
      std::string cases = edit_cases_path.empty() ? paths.test_cases : edit_cases_path;
      std::string out =
          edit_out_path.empty() ? config.output_dir + "/results.jsonl" : edit_out_path;
      auto summary = gme::cli::cmd_edit(config, cases, out);
      std::cout << summary.case_count << " cases edited, " << summary.failure_count
                << " failures -> " << summary.results_path << "\n";
    } else if (evaluate->parsed()) {
      std::string cases = eval_cases_path.empty() ? paths.test_cases : eval_cases_path;
      std::string report_path =
          eval_report_path.empty() ? config.output_dir + "/report.json" : eval_report_path;
      if (!eval_no_edit && eval_results.empty()) {
        std::cerr << "evaluate needs --results (or --no-edit)\n";
        return 2;
      }
      auto report = gme::cli::cmd_evaluate(config, cases, eval_results, report_path,
                                           eval_no_edit);
      std::cout << "report -> " << report_path << "\n";
      print_report_summary(report);
    } else if (reproduce->parsed()) {
      auto summary = gme::cli::cmd_reproduce_synthetic(config);
      std::cout << "run complete under " << config.output_dir << "\n";
      std::cout << "no-edit baseline:\n";
      print_report_summary(summary.at("no_edit_eval"));
      std::cout << "after editing:\n";
      print_report_summary(summary.at("eval"));
    }
  } catch (const gme::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
