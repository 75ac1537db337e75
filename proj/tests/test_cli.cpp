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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gme/cli/commands.hpp"
#include "gme/common/error.hpp"
#include "gme/corpus/io.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/maskgen/maskgen.hpp"
#include "gme/recombiner/recombiner.hpp"

using namespace gme;
using namespace gme::cli;

namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const char* tag) {
  auto dir = fs::temp_directory_path() /
             (std::string("gme-cli-") + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig tiny_run(const std::string& out) {
  RunConfig c = desk_scale_defaults();
  c.output_dir = out;
  c.seed = 5;
  c.threads = 2;
  c.corpus.synthetic_train = 40;
  c.corpus.synthetic_valid = 8;
  c.corpus.synthetic_test = 6;
  return c;
}

// Untrained micro checkpoints sharing one vocabulary, enough to drive cmd_edit.
void plant_micro_checkpoints(const RunConfig& config, bool with_attribution = false) {
  RunPaths paths = run_paths(config);
  auto train = corpus::load_training_corpus(paths.train);
  auto cases = corpus::load_edit_cases(paths.test_cases);
  std::vector<Words> sources;
  for (const auto& s : train) {
    sources.push_back(s.response);
    for (const auto& p : s.persona) sources.push_back(p);
    for (const auto& t : s.history) sources.push_back(t.text);
  }
  for (const auto& c : cases) {
    sources.push_back(c.original_response);
    for (const auto& p : c.editing_persona) sources.push_back(p);
    for (const auto& t : c.history) sources.push_back(t.text);
    for (const auto& r : c.references) sources.push_back(r);
  }
  model::Vocabulary vocab = model::Vocabulary::build(sources);

  model::CoreConfig tag_core{vocab.size(), 64, 32, 2, 2, 64, model::kNumTokenTypes, false};
  maskgen::MaskTagger tagger(tag_core, vocab, {0.3, 0.7}, 1);
  tagger.save(paths.maskgen_ckpt);

  model::CoreConfig rec_core{vocab.size(), 112, 32, 2, 2, 64, model::kNumTokenTypes, true};
  model::SequenceModel rec(rec_core, vocab, 2);
  rec.save(paths.recombiner_ckpt, recombiner::kCheckpointKind);

  if (with_attribution) {
    model::CoreConfig attr_core{vocab.size(), 64, 32, 2, 2, 64, model::kNumTokenTypes, true};
    model::SequenceModel attr(attr_core, vocab, 3);
    attr.save(paths.attribution_ckpt, "response-to-persona");
  }
}

}  // namespace

TEST_CASE("config text round trip and overrides") {
  RunConfig base = desk_scale_defaults();
  std::string rendered = render_config(base);
  RunConfig parsed = desk_scale_defaults();
  parsed.sampler.delta = -1;  // will be overwritten by the rendered text
  apply_config_text(parsed, rendered, "inline");
  CHECK(parsed.sampler.delta == base.sampler.delta);
  CHECK(parsed.recombiner.train.max_steps == base.recombiner.train.max_steps);
  CHECK(parsed.epsilon == base.epsilon);

  apply_config_text(parsed, "[thresholds]\nepsilon = 0.75\n", "inline");
  CHECK(parsed.epsilon == 0.75);
  CHECK_THROWS_AS(apply_config_text(parsed, "[thresholds]\nbogus = 1\n", "inline"),
                  ConfigError);
  CHECK_THROWS_AS(apply_config_text(parsed, "[run]\nthreads = soup\n", "inline"), ConfigError);
}

TEST_CASE("validation lists every failure") {
  RunConfig c = desk_scale_defaults();
  c.output_dir = "";
  c.sampler.tau = -1.0;
  c.epsilon = 3.0;
  c.corpus.source = "nonsense";
  auto errors = validate(c);
  CHECK(errors.size() >= 4);
  CHECK_THROWS_AS(validate_or_throw(c), ConfigError);
}

TEST_CASE("prepare-data is deterministic and writes stats with dropped counts") {
  std::string out_a = fresh_dir("prep-a");
  std::string out_b = fresh_dir("prep-b");
  RunConfig a = tiny_run(out_a);
  RunConfig b = tiny_run(out_b);
  auto stats_a = cmd_prepare_data(a);
  auto stats_b = cmd_prepare_data(b);
  RunPaths paths_a = run_paths(a);
  RunPaths paths_b = run_paths(b);
  for (const auto* f : {&paths_a.train, &paths_a.valid, &paths_a.test_cases,
                        &paths_a.valid_cases, &paths_a.lexicon, &paths_a.stats}) {
    CHECK(fs::exists(*f));
  }
  CHECK(slurp(paths_a.train) == slurp(paths_b.train));
  CHECK(slurp(paths_a.test_cases) == slurp(paths_b.test_cases));
  CHECK(stats_a.at("train").contains("dropped_by_leakage_filter"));
  CHECK(stats_a == stats_b);

  // The persisted config sits next to the outputs.
  CHECK(fs::exists(out_a + "/prepare-data_config.ini"));
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("the output lock rejects concurrent commands") {
  std::string out = fresh_dir("lock");
  std::ofstream lock(out + "/.lock");
  lock << "held\n";
  lock.close();
  RunConfig c = tiny_run(out);
  CHECK_THROWS_AS(cmd_prepare_data(c), ConfigError);
  fs::remove(out + "/.lock");
  CHECK_NOTHROW(cmd_prepare_data(c));
  CHECK(!fs::exists(out + "/.lock"));  // released on exit
  fs::remove_all(out);
}

TEST_CASE("cmd_edit handles the empty case file and epsilon changes templates") {
  std::string out = fresh_dir("edit");
  RunConfig c = tiny_run(out);
  cmd_prepare_data(c);
  plant_micro_checkpoints(c);
  RunPaths paths = run_paths(c);

  // Empty case file: empty results, no failures.
  std::string empty_cases = out + "/empty_cases.jsonl";
  std::ofstream(empty_cases).close();
  auto summary = cmd_edit(c, empty_cases, out + "/empty_results.jsonl");
  CHECK(summary.case_count == 0);
  CHECK(summary.failure_count == 0);
  CHECK(slurp(out + "/empty_results.jsonl").empty());

  // An untrained tagger emits exactly 0.5 confidences; epsilon on either side
  // of 0.5 switches between no masks and some masks.
  c.epsilon = 0.6;
  auto high = cmd_edit(c, paths.test_cases, out + "/results_high.jsonl");
  c.epsilon = 0.4;
  auto low = cmd_edit(c, paths.test_cases, out + "/results_low.jsonl");
  CHECK(high.case_count == low.case_count);
  std::string high_text = slurp(out + "/results_high.jsonl");
  std::string low_text = slurp(out + "/results_low.jsonl");
  CHECK(high_text.find("[MASK-SPAN]") == std::string::npos);
  CHECK(low_text.find("[MASK-SPAN]") != std::string::npos);

  // Results align one line per case, in order.
  auto cases = corpus::load_edit_cases(paths.test_cases);
  std::istringstream lines(high_text);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("case_index") == count);
    ++count;
  }
  CHECK(count == cases.size());
  fs::remove_all(out);
}

TEST_CASE("cmd_evaluate scores no-edit baselines and aggregates seeds") {
  std::string out = fresh_dir("eval");
  RunConfig c = tiny_run(out);
  cmd_prepare_data(c);
  RunPaths paths = run_paths(c);

  auto no_edit = cmd_evaluate(c, paths.test_cases, {}, out + "/no_edit.json", true);
  double p = no_edit.at("per_seed")[0].at("p_score").get<double>();
  CHECK(p < 0.0);  // contradicting cases by construction
  CHECK(no_edit.at("per_seed")[0].at("behavioral").at("med_to_original").get<double>() ==
        0.0);

  // Two identical "seed" result files that copy the first reference.
  auto cases = corpus::load_edit_cases(paths.test_cases);
  for (const char* name : {"/seed1.jsonl", "/seed2.jsonl"}) {
    std::ofstream rf(out + name);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      nlohmann::json j;
      j["case_index"] = i;
      j["edited_response"] = join_words(cases[i].references[0]);
      j["template"] = "";
      j["truncated"] = false;
      rf << j.dump() << "\n";
    }
  }
  auto report = cmd_evaluate(c, paths.test_cases, {out + "/seed1.jsonl", out + "/seed2.jsonl"},
                             out + "/report.json", false);
  CHECK(report.at("aggregate").at("bleu").at("mean").get<double>() == doctest::Approx(100.0));
  CHECK(report.at("aggregate").at("bleu").at("stddev").get<double>() ==
        doctest::Approx(0.0));
  CHECK(report.at("aggregate").at("p_score").at("mean").get<double>() > 0.0);
  CHECK(fs::exists(out + "/per_sample.jsonl"));

  // Misaligned results abort with the first missing id.
  {
    std::ofstream rf(out + "/short.jsonl");
    nlohmann::json j;
    j["case_index"] = 0;
    j["edited_response"] = "hello there .";
    rf << j.dump() << "\n";
  }
  CHECK_THROWS_WITH_AS(
      cmd_evaluate(c, paths.test_cases, {out + "/short.jsonl"}, out + "/r.json", false),
      doctest::Contains("first missing id 1"), Error);
  fs::remove_all(out);
}

TEST_CASE("cmd_train requires prepared data and skips completed stages") {
  std::string out = fresh_dir("train-resume");
  RunConfig c = tiny_run(out);
  CHECK_THROWS_AS(cmd_train(c), ConfigError);  // nothing prepared yet

  cmd_prepare_data(c);
  plant_micro_checkpoints(c, /*with_attribution=*/true);
  auto summary = cmd_train(c);
  CHECK(summary.at("attribution").value("resumed", false));
  CHECK(summary.at("maskgen").value("resumed", false));
  CHECK(summary.at("recombiner").value("resumed", false));
  fs::remove_all(out);
}

TEST_CASE("gme binary handles help and a tiny prepare-data run") {
  std::string out = fresh_dir("bin");
  std::string binary = GME_CLI_BINARY;
  CHECK(std::system((binary + " --help > " + out + "/help.txt 2>&1").c_str()) == 0);
  std::string help = slurp(out + "/help.txt");
  CHECK(help.find("prepare-data") != std::string::npos);
  CHECK(help.find("reproduce-synthetic") != std::string::npos);

  std::string config_path = out + "/tiny.ini";
  {
    std::ofstream cfg(config_path);
    cfg << "[run]\noutput = " << out << "/run\nseed = 3\n";
    cfg << "[corpus]\nsynthetic_train = 20\nsynthetic_valid = 5\nsynthetic_test = 4\n";
  }
  int rc = std::system(
      (binary + " --config " + config_path + " prepare-data > " + out + "/prep.txt 2>&1")
          .c_str());
  CHECK(rc == 0);
  CHECK(fs::exists(out + "/run/data/train.jsonl"));

  // Unknown flags and missing subcommands fail loudly.
  CHECK(std::system((binary + " > /dev/null 2>&1").c_str()) != 0);
  fs::remove_all(out);
}
