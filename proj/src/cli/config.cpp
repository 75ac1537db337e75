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

#include "gme/cli/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gme/common/error.hpp"
#include "gme/common/text.hpp"

namespace gme::cli {

RunConfig desk_scale_defaults() {
  RunConfig c;
  c.threads = 2;

  c.corpus.synthetic_train = 2500;
  c.corpus.synthetic_valid = 250;
  c.corpus.synthetic_test = 500;

  // The saliency threshold re-checked against the desk-scale backbone: the
  // norm distribution puts the useful cut at the library default of 3.
  c.sampler.delta = 3.0;

  c.attribution.core = {0, 48, 48, 2, 4, 96, model::kNumTokenTypes, true};
  c.attribution.train.batch_size = 32;
  c.attribution.train.learning_rate = 2e-3;
  c.attribution.train.max_steps = 700;
  c.attribution.train.eval_interval = 175;

  c.recombiner.core = {0, 112, 64, 2, 4, 128, model::kNumTokenTypes, true};
  c.recombiner.train.batch_size = 32;
  c.recombiner.train.learning_rate = 2e-3;
  c.recombiner.train.max_steps = 4500;
  c.recombiner.train.eval_interval = 450;

  c.maskgen.core = {0, 64, 32, 2, 4, 64, model::kNumTokenTypes, false};
  c.maskgen.train.batch_size = 32;
  c.maskgen.train.learning_rate = 2e-3;
  c.maskgen.train.max_steps = 1200;
  c.maskgen.train.eval_interval = 300;

  return c;
}

namespace {

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<IniEntry> parse_ini(const std::string& text, const std::string& origin) {
  std::vector<IniEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    trimmed = line.substr(begin, end - begin + 1);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
      }
      section = trimmed.substr(1, trimmed.size() - 2);
      continue;
    }
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    auto strip = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      std::size_t e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    entries.push_back({section, strip(key), strip(value), line_no});
  }
  return entries;
}

double to_real(const IniEntry& e, const std::string& origin) {
  char* end = nullptr;
  double v = std::strtod(e.value.c_str(), &end);
  if (end == e.value.c_str() || *end != '\0') {
    throw ConfigError(origin + ":" + std::to_string(e.line) + ": \"" + e.value +
                      "\" is not a number");
  }
  return v;
}

long long to_int(const IniEntry& e, const std::string& origin) {
  char* end = nullptr;
  long long v = std::strtoll(e.value.c_str(), &end, 10);
  if (end == e.value.c_str() || *end != '\0') {
    throw ConfigError(origin + ":" + std::to_string(e.line) + ": \"" + e.value +
                      "\" is not an integer");
  }
  return v;
}

bool to_bool(const IniEntry& e, const std::string& origin) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError(origin + ":" + std::to_string(e.line) + ": \"" + e.value +
                    "\" is not a boolean");
}

bool apply_stage(StageConfig& stage, const IniEntry& e, const std::string& origin) {
  const std::string& k = e.key;
  if (k == "d_model") stage.core.d_model = static_cast<int>(to_int(e, origin));
  else if (k == "n_layers") stage.core.n_layers = static_cast<int>(to_int(e, origin));
  else if (k == "n_heads") stage.core.n_heads = static_cast<int>(to_int(e, origin));
  else if (k == "d_ff") stage.core.d_ff = static_cast<int>(to_int(e, origin));
  else if (k == "n_ctx") stage.core.n_ctx = static_cast<int>(to_int(e, origin));
  else if (k == "batch_size") stage.train.batch_size = static_cast<int>(to_int(e, origin));
  else if (k == "learning_rate") stage.train.learning_rate = to_real(e, origin);
  else if (k == "max_steps") stage.train.max_steps = static_cast<int>(to_int(e, origin));
  else if (k == "eval_interval") stage.train.eval_interval = static_cast<int>(to_int(e, origin));
  else if (k == "gradient_clip") stage.train.gradient_clip = to_real(e, origin);
  else if (k == "lr_patience") stage.train.lr_patience = static_cast<int>(to_int(e, origin));
  else if (k == "max_lr_decays") stage.train.max_lr_decays = static_cast<int>(to_int(e, origin));
  else return false;
  return true;
}

}  // namespace

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  for (const auto& e : parse_ini(text, origin)) {
    bool known = true;
    if (e.section == "run") {
      if (e.key == "output") config.output_dir = e.value;
      else if (e.key == "seed") config.seed = static_cast<std::uint64_t>(to_int(e, origin));
      else if (e.key == "threads") config.threads = static_cast<int>(to_int(e, origin));
      else if (e.key == "max_decode_length") config.max_decode_length = static_cast<int>(to_int(e, origin));
      else if (e.key == "failure_rate_cap") config.failure_rate_cap = to_real(e, origin);
      else if (e.key == "strict_copy") config.strict_copy = to_bool(e, origin);
      else known = false;
    } else if (e.section == "corpus") {
      if (e.key == "source") config.corpus.source = e.value;
      else if (e.key == "train") config.corpus.train_path = e.value;
      else if (e.key == "valid") config.corpus.valid_path = e.value;
      else if (e.key == "valid_cases") config.corpus.valid_cases_path = e.value;
      else if (e.key == "test_cases") config.corpus.test_cases_path = e.value;
      else if (e.key == "lexicon") config.corpus.lexicon_path = e.value;
      else if (e.key == "select_pool") config.corpus.select_pool_path = e.value;
      else if (e.key == "synthetic_train") config.corpus.synthetic_train = static_cast<std::size_t>(to_int(e, origin));
      else if (e.key == "synthetic_valid") config.corpus.synthetic_valid = static_cast<std::size_t>(to_int(e, origin));
      else if (e.key == "synthetic_test") config.corpus.synthetic_test = static_cast<std::size_t>(to_int(e, origin));
      else if (e.key == "leak_rate") config.corpus.leak_rate = to_real(e, origin);
      else known = false;
    } else if (e.section == "sampler") {
      if (e.key == "delta") config.sampler.delta = to_real(e, origin);
      else if (e.key == "tau") config.sampler.tau = to_real(e, origin);
      else if (e.key == "noise_rate") config.sampler.noise_rate = to_real(e, origin);
      else known = false;
    } else if (e.section == "thresholds") {
      if (e.key == "epsilon") config.epsilon = to_real(e, origin);
      else if (e.key == "label_smoothing") config.label_smoothing = to_real(e, origin);
      else known = false;
    } else if (e.section == "attribution") {
      known = apply_stage(config.attribution, e, origin);
    } else if (e.section == "recombiner") {
      known = apply_stage(config.recombiner, e, origin);
    } else if (e.section == "maskgen") {
      known = apply_stage(config.maskgen, e, origin);
    } else if (e.section == "selection") {
      if (e.key == "select_by_average") config.select_by_average = to_bool(e, origin);
      else if (e.key == "average_cases") config.average_cases = static_cast<std::size_t>(to_int(e, origin));
      else known = false;
    } else if (e.section == "nli") {
      if (e.key == "backend") config.nli.backend = e.value;
      else if (e.key == "resource") config.nli.resource = e.value;
      else known = false;
    } else if (e.section == "eval") {
      if (e.key == "med_persona_min") config.eval.med_persona_min = to_bool(e, origin);
      else if (e.key == "lm_scorer") config.eval.lm_scorer_command = e.value;
      else known = false;
    } else {
      known = false;
    }
    if (!known) {
      throw ConfigError(origin + ":" + std::to_string(e.line) + ": unknown key [" +
                        e.section + "] " + e.key);
    }
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig config = desk_scale_defaults();
  apply_config_text(config, buf.str(), path);
  return config;
}

std::string render_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "output = " << c.output_dir << "\n";
  out << "seed = " << c.seed << "\n";
  out << "threads = " << c.threads << "\n";
  out << "max_decode_length = " << c.max_decode_length << "\n";
  out << "failure_rate_cap = " << c.failure_rate_cap << "\n";
  out << "strict_copy = " << (c.strict_copy ? "true" : "false") << "\n\n";
  out << "[corpus]\n";
  out << "source = " << c.corpus.source << "\n";
  if (!c.corpus.train_path.empty()) out << "train = " << c.corpus.train_path << "\n";
  if (!c.corpus.valid_path.empty()) out << "valid = " << c.corpus.valid_path << "\n";
  if (!c.corpus.valid_cases_path.empty()) out << "valid_cases = " << c.corpus.valid_cases_path << "\n";
  if (!c.corpus.test_cases_path.empty()) out << "test_cases = " << c.corpus.test_cases_path << "\n";
  if (!c.corpus.lexicon_path.empty()) out << "lexicon = " << c.corpus.lexicon_path << "\n";
  if (!c.corpus.select_pool_path.empty()) out << "select_pool = " << c.corpus.select_pool_path << "\n";
  out << "synthetic_train = " << c.corpus.synthetic_train << "\n";
  out << "synthetic_valid = " << c.corpus.synthetic_valid << "\n";
  out << "synthetic_test = " << c.corpus.synthetic_test << "\n";
  out << "leak_rate = " << c.corpus.leak_rate << "\n\n";
  out << "[sampler]\n";
  out << "delta = " << c.sampler.delta << "\n";
  out << "tau = " << c.sampler.tau << "\n";
  out << "noise_rate = " << c.sampler.noise_rate << "\n\n";
  out << "[thresholds]\n";
  out << "epsilon = " << c.epsilon << "\n";
  out << "label_smoothing = " << c.label_smoothing << "\n\n";
  auto stage = [&](const char* name, const StageConfig& s) {
    out << "[" << name << "]\n";
    out << "d_model = " << s.core.d_model << "\n";
    out << "n_layers = " << s.core.n_layers << "\n";
    out << "n_heads = " << s.core.n_heads << "\n";
    out << "d_ff = " << s.core.d_ff << "\n";
    out << "n_ctx = " << s.core.n_ctx << "\n";
    out << "batch_size = " << s.train.batch_size << "\n";
    out << "learning_rate = " << s.train.learning_rate << "\n";
    out << "max_steps = " << s.train.max_steps << "\n";
    out << "eval_interval = " << s.train.eval_interval << "\n";
    out << "gradient_clip = " << s.train.gradient_clip << "\n";
    out << "lr_patience = " << s.train.lr_patience << "\n";
    out << "max_lr_decays = " << s.train.max_lr_decays << "\n\n";
  };
  stage("attribution", c.attribution);
  stage("recombiner", c.recombiner);
  stage("maskgen", c.maskgen);
  out << "[selection]\n";
  out << "select_by_average = " << (c.select_by_average ? "true" : "false") << "\n";
  out << "average_cases = " << c.average_cases << "\n\n";
  out << "[nli]\n";
  out << "backend = " << c.nli.backend << "\n";
  if (!c.nli.resource.empty()) out << "resource = " << c.nli.resource << "\n";
  out << "\n[eval]\n";
  out << "med_persona_min = " << (c.eval.med_persona_min ? "true" : "false") << "\n";
  if (!c.eval.lm_scorer_command.empty()) out << "lm_scorer = " << c.eval.lm_scorer_command << "\n";
  return out.str();
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };
  need(!c.output_dir.empty(), "run.output must be set");
  need(c.threads >= 1, "run.threads must be >= 1");
  need(c.max_decode_length > 0, "run.max_decode_length must be positive");
  need(c.failure_rate_cap >= 0.0 && c.failure_rate_cap <= 1.0,
       "run.failure_rate_cap must be in [0, 1]");
  need(c.corpus.source == "synthetic" || c.corpus.source == "files",
       "corpus.source must be \"synthetic\" or \"files\"");
  if (c.corpus.source == "files") {
    auto exists = [](const std::string& p) {
      return !p.empty() && std::filesystem::exists(p);
    };
    need(exists(c.corpus.train_path), "corpus.train path missing: " + c.corpus.train_path);
    need(exists(c.corpus.valid_path), "corpus.valid path missing: " + c.corpus.valid_path);
    need(exists(c.corpus.test_cases_path),
         "corpus.test_cases path missing: " + c.corpus.test_cases_path);
  } else {
    need(c.corpus.synthetic_train > 0 && c.corpus.synthetic_valid > 0 &&
             c.corpus.synthetic_test > 0,
         "corpus.synthetic sizes must be positive");
    need(c.corpus.leak_rate >= 0.0 && c.corpus.leak_rate < 1.0,
         "corpus.leak_rate must be in [0, 1)");
  }
  need(c.sampler.delta > 0.0, "sampler.delta must be positive");
  need(c.sampler.tau > 0.0, "sampler.tau must be positive");
  need(c.sampler.noise_rate >= 0.0 && c.sampler.noise_rate < 1.0,
       "sampler.noise_rate must be in [0, 1)");
  need(c.epsilon >= 0.0 && c.epsilon <= 1.0, "thresholds.epsilon must be in [0, 1]");
  need(c.label_smoothing >= 0.0 && c.label_smoothing < 1.0,
       "thresholds.label_smoothing must be in [0, 1)");
  need(c.nli.backend == "rule-oracle" || c.nli.backend == "external",
       "nli.backend must be \"rule-oracle\" or \"external\"");
  auto check_stage = [&](const char* name, const StageConfig& s) {
    if (s.core.d_model <= 0 || s.core.n_layers <= 0 || s.core.n_heads <= 0 ||
        s.core.d_ff <= 0 || s.core.n_ctx <= 0) {
      errors.push_back(std::string(name) + ": model dimensions must be positive");
    } else if (s.core.d_model % s.core.n_heads != 0) {
      errors.push_back(std::string(name) + ": d_model must be divisible by n_heads");
    }
    if (s.train.batch_size <= 0 || s.train.max_steps <= 0) {
      errors.push_back(std::string(name) + ": batch_size and max_steps must be positive");
    }
    if (s.train.learning_rate <= 0.0) {
      errors.push_back(std::string(name) + ": learning_rate must be positive");
    }
  };
  check_stage("attribution", c.attribution);
  check_stage("recombiner", c.recombiner);
  check_stage("maskgen", c.maskgen);
  return errors;
}

}  // namespace gme::cli
