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

#include "gme/cli/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unistd.h>

#include "gme/attribution/attribution.hpp"
#include "gme/common/error.hpp"
#include "gme/corpus/filters.hpp"
#include "gme/corpus/io.hpp"
#include "gme/corpus/synthetic.hpp"
#include "gme/editor/editor.hpp"
#include "gme/eval/report.hpp"
#include "gme/maskgen/maskgen.hpp"
#include "gme/nli/nli.hpp"
#include "gme/recombiner/recombiner.hpp"
#include "gme/templating/ops.hpp"
#include "gme/templating/stopwords.hpp"

namespace gme::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunPaths run_paths(const RunConfig& config) {
  RunPaths p;
  p.data_dir = config.output_dir + "/data";
  p.checkpoints_dir = config.output_dir + "/checkpoints";
  p.train = p.data_dir + "/train.jsonl";
  p.valid = p.data_dir + "/valid.jsonl";
  p.valid_cases = p.data_dir + "/valid_cases.jsonl";
  p.test_cases = p.data_dir + "/test_cases.jsonl";
  p.lexicon = p.data_dir + "/lexicon.json";
  p.stats = p.data_dir + "/stats.json";
  p.attribution_ckpt = p.checkpoints_dir + "/attribution";
  p.maskgen_ckpt = p.checkpoints_dir + "/maskgen";
  p.recombiner_ckpt = p.checkpoints_dir + "/recombiner";
  p.train_summary = config.output_dir + "/train_summary.json";
  return p;
}

OutputLock::OutputLock(const std::string& output_dir) {
  fs::create_directories(output_dir);
  path_ = output_dir + "/.lock";
  if (fs::exists(path_)) {
    throw ConfigError("output directory is locked by another command (" + path_ +
                      "); remove the lockfile if that run is dead");
  }
  std::ofstream out(path_);
  out << ::getpid() << "\n";
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void validate_or_throw(const RunConfig& config) {
  auto errors = validate(config);
  if (errors.empty()) return;
  std::string message = "invalid configuration:";
  for (const auto& e : errors) message += "\n  - " + e;
  throw ConfigError(message);
}

namespace {

void persist_config(const RunConfig& config, const std::string& command) {
  fs::create_directories(config.output_dir);
  std::ofstream out(config.output_dir + "/" + command + "_config.ini");
  out << render_config(config);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

json stats_to_json(const corpus::CorpusStats& stats) {
  json hist = json::object();
  for (const auto& [k, v] : stats.persona_sentence_histogram) {
    hist[std::to_string(k)] = v;
  }
  return {{"sample_count", stats.sample_count}, {"persona_sentence_histogram", hist}};
}

std::unique_ptr<nli::NliBackend> make_nli_backend(const RunConfig& config,
                                                  const RunPaths& paths) {
  nli::NliBackendDescriptor desc;
  if (config.nli.backend == "external") {
    desc.kind = nli::NliBackendDescriptor::Kind::kExternalModel;
    desc.resource = config.nli.resource;
  } else {
    desc.kind = nli::NliBackendDescriptor::Kind::kRuleOracle;
    desc.resource = config.nli.resource.empty() ? paths.lexicon : config.nli.resource;
  }
  return nli::make_backend(desc);
}

model::Vocabulary build_run_vocabulary(const std::vector<corpus::DialogueSample>& train,
                                       const std::vector<corpus::DialogueSample>& valid,
                                       const std::vector<corpus::EditCase>& valid_cases,
                                       const std::vector<corpus::EditCase>& test_cases,
                                       const std::string& lexicon_path) {
  std::vector<Words> sources;
  auto add_sample = [&](const corpus::DialogueSample& s) {
    sources.push_back(s.response);
    for (const auto& p : s.persona) sources.push_back(p);
    for (const auto& t : s.history) sources.push_back(t.text);
  };
  auto add_case = [&](const corpus::EditCase& c) {
    sources.push_back(c.original_response);
    for (const auto& p : c.editing_persona) sources.push_back(p);
    for (const auto& t : c.history) sources.push_back(t.text);
    for (const auto& r : c.references) sources.push_back(r);
  };
  for (const auto& s : train) add_sample(s);
  for (const auto& s : valid) add_sample(s);
  for (const auto& c : valid_cases) add_case(c);
  for (const auto& c : test_cases) add_case(c);
  if (!lexicon_path.empty() && fs::exists(lexicon_path)) {
    auto lexicon = nli::SlotLexicon::load(lexicon_path);
    sources.push_back(lexicon.all_values());
    for (const auto& p : lexicon.predicates()) {
      sources.push_back(p.phrase);
      sources.push_back({"i"});
    }
  }
  return model::Vocabulary::build(sources);
}

void write_loss_trace(const std::string& path, const model::TrainResult& result) {
  std::ofstream out(path);
  for (const auto& [step, loss] : result.loss_trace) {
    out << json{{"step", step}, {"loss", loss}}.dump() << "\n";
  }
  for (const auto& v : result.validations) {
    out << json{{"step", v.step}, {"validation", v.metric}, {"lr", v.learning_rate}}.dump()
        << "\n";
  }
}

// Target mask vectors for every sample: (Gradient u Overlap) \ Stopwords.
std::vector<templating::TokenMaskVector> build_targets(
    const std::vector<corpus::DialogueSample>& samples,
    const model::SequenceModel& attribution_model, double delta) {
  attribution::SaliencyComputer saliency(attribution_model);
  const auto& stop = templating::english_stopwords();
  std::vector<templating::TokenMaskVector> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    auto scores = saliency.compute(s.response, s.persona);
    auto grad = attribution::gradient_set(scores, delta);
    auto over = templating::overlap_set(s.response, s.persona);
    auto stops = templating::stopword_set(s.response, stop);
    targets.push_back(templating::target_mask_vector(s.response, grad, over, stops));
  }
  return targets;
}

}  // namespace

json cmd_prepare_data(const RunConfig& config) {
  validate_or_throw(config);
  OutputLock lock(config.output_dir);
  persist_config(config, "prepare-data");
  RunPaths paths = run_paths(config);
  fs::create_directories(paths.data_dir);

  std::vector<corpus::DialogueSample> train, valid;
  std::vector<corpus::EditCase> valid_cases, test_cases;

  if (config.corpus.source == "synthetic") {
    corpus::SyntheticSizes sizes{config.corpus.synthetic_train, config.corpus.synthetic_valid,
                                 config.corpus.synthetic_test};
    auto synthetic =
        corpus::generate_synthetic_corpus(config.seed, sizes, config.corpus.leak_rate);
    train = std::move(synthetic.train);
    valid = std::move(synthetic.valid);
    valid_cases = std::move(synthetic.valid_cases);
    test_cases = std::move(synthetic.test_cases);
    synthetic.lexicon.save(paths.lexicon);
  } else {
    train = corpus::load_training_corpus(config.corpus.train_path);
    valid = corpus::load_training_corpus(config.corpus.valid_path);
    if (!config.corpus.valid_cases_path.empty()) {
      valid_cases = corpus::load_edit_cases(config.corpus.valid_cases_path);
    }
    test_cases = corpus::load_edit_cases(config.corpus.test_cases_path);
    if (!config.corpus.lexicon_path.empty()) {
      fs::copy_file(config.corpus.lexicon_path, paths.lexicon,
                    fs::copy_options::overwrite_existing);
    }

    if (!config.corpus.select_pool_path.empty()) {
      // Re-select editing personas from the pool; existing references are
      // dropped because they were written for the original personas.
      std::vector<std::vector<Words>> pool;
      std::ifstream in(config.corpus.select_pool_path);
      if (!in) throw IoError("cannot open select_pool: " + config.corpus.select_pool_path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        std::vector<Words> profile;
        for (const auto& s : j.at("persona")) profile.push_back(split_words(s.get<std::string>()));
        pool.push_back(std::move(profile));
      }
      auto backend = make_nli_backend(config, paths);
      auto reselect = [&](std::vector<corpus::EditCase>& cases) {
        std::vector<corpus::CaseSeed> seeds;
        for (const auto& c : cases) seeds.push_back({c.history, c.original_response});
        cases = corpus::select_editing_personas(seeds, pool, *backend);
      };
      reselect(valid_cases);
      reselect(test_cases);
    }
  }

  auto editing = corpus::editing_persona_set(valid_cases);
  auto test_editing = corpus::editing_persona_set(test_cases);
  editing.insert(test_editing.begin(), test_editing.end());
  auto filtered_train = corpus::filter_persona_leakage(train, editing);
  auto filtered_valid = corpus::filter_persona_leakage(valid, editing);

  corpus::write_training_corpus(paths.train, filtered_train.retained);
  corpus::write_training_corpus(paths.valid, filtered_valid.retained);
  corpus::write_edit_cases(paths.valid_cases, valid_cases);
  corpus::write_edit_cases(paths.test_cases, test_cases);

  json stats;
  stats["train"] = stats_to_json(corpus::compute_stats(filtered_train.retained));
  stats["train"]["dropped_by_leakage_filter"] = filtered_train.dropped;
  stats["valid"] = stats_to_json(corpus::compute_stats(filtered_valid.retained));
  stats["valid"]["dropped_by_leakage_filter"] = filtered_valid.dropped;
  stats["valid_cases"] = stats_to_json(corpus::compute_case_stats(valid_cases));
  stats["test_cases"] = stats_to_json(corpus::compute_case_stats(test_cases));
  stats["editing_persona_sentences"] = editing.size();
  write_json(paths.stats, stats);
  return stats;
}

json cmd_train(const RunConfig& config) {
  validate_or_throw(config);
  OutputLock lock(config.output_dir);
  persist_config(config, "train");
  RunPaths paths = run_paths(config);
  for (const char* p : {paths.train.c_str(), paths.valid.c_str(), paths.test_cases.c_str()}) {
    if (!fs::exists(p)) {
      throw ConfigError(std::string("prepared data missing: ") + p +
                        " (run prepare-data first)");
    }
  }
  fs::create_directories(paths.checkpoints_dir);

  auto train = corpus::load_training_corpus(paths.train);
  auto valid = corpus::load_training_corpus(paths.valid);
  std::vector<corpus::EditCase> valid_cases;
  if (fs::exists(paths.valid_cases)) valid_cases = corpus::load_edit_cases(paths.valid_cases);
  std::vector<corpus::EditCase> test_cases = corpus::load_edit_cases(paths.test_cases);

  model::Vocabulary vocab =
      build_run_vocabulary(train, valid, valid_cases, test_cases, paths.lexicon);

  json summary;
  summary["vocab_size"] = vocab.size();
  auto timer = [] { return std::chrono::steady_clock::now(); };
  auto seconds = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };

  // Stage 1: response-to-persona attribution model.
  std::unique_ptr<model::SequenceModel> attribution_model;
  if (fs::exists(paths.attribution_ckpt + "/manifest.json")) {
    attribution_model = model::SequenceModel::load(paths.attribution_ckpt,
                                                   attribution::kCheckpointKind);
    summary["attribution"]["resumed"] = true;
  } else {
    auto t0 = timer();
    try {
      attribution::AttributionConfig acfg;
      acfg.core = config.attribution.core;
      acfg.train = config.attribution.train;
      acfg.train.threads = config.threads;
      acfg.train.seed = splitmix64(config.seed ^ 0xa11ull);
      model::TrainResult result;
      attribution_model =
          attribution::train_response_to_persona(train, valid, acfg, &vocab, &result);
      attribution_model->save(paths.attribution_ckpt, attribution::kCheckpointKind);
      write_loss_trace(paths.checkpoints_dir + "/attribution_trace.jsonl", result);
      summary["attribution"] = {{"steps", result.steps_run},
                                {"best_val_nll", result.best_metric},
                                {"seconds", seconds(t0, timer())}};
    } catch (const Error& e) {
      throw TrainingError(std::string("stage attribution: ") + e.what());
    }
  }

  // Stage 2: training targets from gradient + overlap - stopwords.
  auto t_targets = timer();
  std::vector<templating::TokenMaskVector> train_targets, valid_targets;
  maskgen::ClassFrequencies frequencies;
  try {
    train_targets = build_targets(train, *attribution_model, config.sampler.delta);
    valid_targets = build_targets(valid, *attribution_model, config.sampler.delta);
    frequencies = maskgen::class_frequencies(train_targets);
  } catch (const Error& e) {
    throw TrainingError(std::string("stage targets: ") + e.what());
  }
  summary["targets"] = {{"f_positive", frequencies.f_positive},
                        {"f_negative", frequencies.f_negative},
                        {"seconds", seconds(t_targets, timer())}};

  // Stage 3: mask generator.
  std::unique_ptr<maskgen::MaskTagger> tagger;
  if (fs::exists(paths.maskgen_ckpt + "/manifest.json")) {
    tagger = maskgen::MaskTagger::load(paths.maskgen_ckpt);
    summary["maskgen"]["resumed"] = true;
  } else {
    auto t0 = timer();
    try {
      maskgen::MaskgenConfig mcfg;
      mcfg.core = config.maskgen.core;
      mcfg.train = config.maskgen.train;
      mcfg.train.threads = config.threads;
      mcfg.train.seed = splitmix64(config.seed ^ 0x3a5ull);
      model::TrainResult result;
      tagger = maskgen::train_mask_classifier(train, train_targets, valid, valid_targets,
                                              frequencies, mcfg, &vocab, &result);
      tagger->save(paths.maskgen_ckpt);
      write_loss_trace(paths.checkpoints_dir + "/maskgen_trace.jsonl", result);
      summary["maskgen"] = {{"steps", result.steps_run},
                            {"best_val_loss", result.best_metric},
                            {"seconds", seconds(t0, timer())}};
    } catch (const Error& e) {
      throw TrainingError(std::string("stage maskgen: ") + e.what());
    }
  }

  // Stage 4: recombiner, selected by validation Average when cases exist.
  if (fs::exists(paths.recombiner_ckpt + "/manifest.json")) {
    summary["recombiner"]["resumed"] = true;
  } else {
    auto t0 = timer();
    try {
      recombiner::RecombinerConfig rcfg;
      rcfg.core = config.recombiner.core;
      rcfg.train = config.recombiner.train;
      rcfg.train.threads = config.threads;
      rcfg.train.seed = splitmix64(config.seed ^ 0x9ecull);
      rcfg.label_smoothing = config.label_smoothing;
      rcfg.max_decode_length = config.max_decode_length;

      recombiner::TemplateSampler train_sampler(
          train_targets, {config.sampler.delta, config.sampler.tau,
                          config.sampler.noise_rate, splitmix64(config.seed ^ 0x7e3ull)});
      recombiner::TemplateSampler valid_sampler(
          valid_targets, {config.sampler.delta, config.sampler.tau,
                          config.sampler.noise_rate, splitmix64(config.seed ^ 0x7e4ull)});

      std::unique_ptr<nli::NliBackend> backend;
      std::vector<corpus::EditCase> avg_cases;
      if (config.select_by_average && !valid_cases.empty()) {
        backend = make_nli_backend(config, paths);
        std::size_t n = std::min(config.average_cases, valid_cases.size());
        avg_cases.assign(valid_cases.begin(), valid_cases.begin() + static_cast<long>(n));
      }

      recombiner::PipelineValidationFn average_validation;
      if (!avg_cases.empty()) {
        average_validation = [&, backend_ptr = backend.get()](
                                 const model::SequenceModel& current) -> double {
          editor::EditorOptions opts{config.epsilon, config.max_decode_length};
          std::vector<Words> predictions;
          predictions.reserve(avg_cases.size());
          for (const auto& c : avg_cases) {
            auto result = editor::edit(c.history, c.original_response, c.editing_persona,
                                       *tagger, current, opts);
            predictions.push_back(result.edited_response);
          }
          eval::EvaluateOptions eopts;
          eopts.nli = backend_ptr;
          auto report = eval::evaluate_predictions(avg_cases, predictions, eopts);
          double average = report.average.value_or(report.p_score.value_or(0.0));
          return -average;  // the loop minimizes
        };
      }

      model::TrainResult result;
      auto recombiner_model =
          recombiner::train_recombiner(train, train_sampler, valid, &valid_sampler, rcfg,
                                       &vocab, average_validation, &result);
      recombiner_model->save(paths.recombiner_ckpt, recombiner::kCheckpointKind);
      write_loss_trace(paths.checkpoints_dir + "/recombiner_trace.jsonl", result);
      summary["recombiner"] = {{"steps", result.steps_run},
                               {"best_metric", result.best_metric},
                               {"selected_by", avg_cases.empty() ? "val_loss" : "average"},
                               {"seconds", seconds(t0, timer())}};
    } catch (const Error& e) {
      throw TrainingError(std::string("stage recombiner: ") + e.what());
    }
  }

  write_json(paths.train_summary, summary);
  return summary;
}

EditSummary cmd_edit(const RunConfig& config, const std::string& cases_path,
                     const std::string& results_path) {
  validate_or_throw(config);
  OutputLock lock(config.output_dir);
  persist_config(config, "edit");
  RunPaths paths = run_paths(config);

  auto tagger = maskgen::MaskTagger::load(paths.maskgen_ckpt);
  auto recombiner_model =
      model::SequenceModel::load(paths.recombiner_ckpt, recombiner::kCheckpointKind);
  auto cases = corpus::load_edit_cases(cases_path);

  editor::EditorOptions opts{config.epsilon, config.max_decode_length, config.strict_copy};
  auto outcome = editor::batch_edit(cases, *tagger, *recombiner_model, opts);

  std::ofstream out(results_path);
  if (!out) throw IoError("cannot write results: " + results_path);
  for (std::size_t i = 0; i < outcome.results.size(); ++i) {
    const auto& r = outcome.results[i];
    json j;
    j["case_index"] = i;
    if (r.error) {
      j["error"] = *r.error;
    } else {
      j["edited_response"] = join_words(r.edited_response);
      j["template"] = r.tmpl.render();
      j["confidences"] = r.mask_decision.confidences;
      j["truncated"] = r.truncated;
    }
    out << j.dump() << "\n";
  }

  EditSummary summary;
  summary.case_count = cases.size();
  summary.failure_count = outcome.failure_count;
  summary.results_path = results_path;
  if (!cases.empty() &&
      static_cast<double>(outcome.failure_count) >
          config.failure_rate_cap * static_cast<double>(cases.size())) {
    throw Error("edit failure rate " + std::to_string(outcome.failure_count) + "/" +
                std::to_string(cases.size()) + " exceeds the cap");
  }
  return summary;
}

json cmd_evaluate(const RunConfig& config, const std::string& cases_path,
                  const std::vector<std::string>& results_paths,
                  const std::string& report_path, bool no_edit) {
  validate_or_throw(config);
  OutputLock lock(config.output_dir);
  persist_config(config, "evaluate");
  RunPaths paths = run_paths(config);
  auto cases = corpus::load_edit_cases(cases_path);

  auto backend = make_nli_backend(config, paths);
  std::unique_ptr<eval::LmScorer> scorer;
  if (!config.eval.lm_scorer_command.empty()) {
    scorer = std::make_unique<eval::ExternalLmScorer>(config.eval.lm_scorer_command);
  }
  eval::EvaluateOptions eopts;
  eopts.nli = backend.get();
  eopts.lm_scorer = scorer.get();
  eopts.med_persona_min = config.eval.med_persona_min;

  auto load_predictions = [&](const std::string& path) -> std::vector<Words> {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results: " + path);
    std::vector<Words> predictions;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      std::size_t case_index = j.value("case_index", index);
      if (case_index != index) {
        throw Error(path + ": misaligned result at line " + std::to_string(index + 1) +
                    " (case_index " + std::to_string(case_index) + ")");
      }
      if (j.contains("error")) {
        // A failed case scores as an unedited response.
        predictions.push_back(index < cases.size() ? cases[index].original_response : Words{});
      } else {
        predictions.push_back(split_words(j.at("edited_response").get<std::string>()));
      }
      ++index;
    }
    if (predictions.size() != cases.size()) {
      throw Error(path + ": " + std::to_string(predictions.size()) + " results for " +
                  std::to_string(cases.size()) + " cases; first missing id " +
                  std::to_string(predictions.size()));
    }
    return predictions;
  };

  std::vector<eval::ScoreReport> reports;
  json per_seed = json::array();
  std::ofstream rows(config.output_dir + "/per_sample.jsonl");
  if (no_edit) {
    std::vector<Words> predictions;
    for (const auto& c : cases) predictions.push_back(c.original_response);
    reports.push_back(eval::evaluate_predictions(cases, predictions, eopts));
    per_seed.push_back(eval::report_to_json(reports.back()));
  } else {
    for (const auto& path : results_paths) {
      auto predictions = load_predictions(path);
      auto report = eval::evaluate_predictions(cases, predictions, eopts);
      json seed_json = eval::report_to_json(report);
      seed_json["results_file"] = path;
      per_seed.push_back(seed_json);
      for (std::size_t i = 0; i < cases.size(); ++i) {
        json row;
        row["results_file"] = path;
        row["case_index"] = i;
        row["med_to_original"] =
            eval::med(predictions[i], cases[i].original_response);
        if (i < report.per_sample_p_score.size()) {
          row["p_score"] = report.per_sample_p_score[i];
        }
        rows << row.dump() << "\n";
      }
      reports.push_back(std::move(report));
    }
  }

  json out;
  out["per_seed"] = per_seed;
  out["aggregate"] = eval::aggregate_reports(reports);
  write_json(report_path, out);
  return out;
}

json cmd_reproduce_synthetic(const RunConfig& base_config) {
  RunConfig config = base_config;
  config.corpus.source = "synthetic";
  json summary;
  summary["prepare"] = cmd_prepare_data(config);
  summary["train"] = cmd_train(config);

  RunPaths paths = run_paths(config);
  std::string results = config.output_dir + "/results.jsonl";
  auto edit_summary = cmd_edit(config, paths.test_cases, results);
  summary["edit"] = {{"cases", edit_summary.case_count},
                     {"failures", edit_summary.failure_count}};
  summary["no_edit_eval"] =
      cmd_evaluate(config, paths.test_cases, {}, config.output_dir + "/report_no_edit.json",
                   /*no_edit=*/true);
  summary["eval"] = cmd_evaluate(config, paths.test_cases, {results},
                                 config.output_dir + "/report.json", /*no_edit=*/false);
  return summary;
}

}  // namespace gme::cli
