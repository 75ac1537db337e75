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

#include "gme/recombiner/recombiner.hpp"

#include <algorithm>

#include "gme/common/error.hpp"

namespace gme::recombiner {

using model::TokenType;
using model::Vocabulary;

namespace {

struct SegmentStream {
  EncodedExample ex;

  void push(int tok, TokenType type, bool loss) {
    ex.token_ids.push_back(tok);
    ex.type_ids.push_back(static_cast<int>(type));
    ex.loss_mask.push_back(loss ? 1 : 0);
  }
  void push_words(const Vocabulary& vocab, const Words& words, TokenType type, bool loss) {
    for (const auto& w : words) push(vocab.id(w), type, loss);
  }
};

TokenType speaker_type(corpus::Speaker s) {
  return s == corpus::Speaker::kSpeaker1 ? TokenType::kHistorySpeaker1
                                         : TokenType::kHistorySpeaker2;
}

}  // namespace

EncodedExample serialize(const Vocabulary& vocab,
                         const std::vector<corpus::DialogueTurn>& history,
                         const templating::Template& tmpl,
                         const std::vector<Words>& persona, const Words* response,
                         int n_ctx) {
  // Fixed-cost segments first to size the history budget.
  SegmentStream fixed;
  for (const auto& sentence : persona) {
    fixed.push_words(vocab, sentence, TokenType::kPersona, false);
    fixed.push(Vocabulary::kSep, TokenType::kPersona, false);
  }
  Words tmpl_words = tmpl.render_words();
  fixed.push_words(vocab, tmpl_words, TokenType::kTemplate, false);
  fixed.push(Vocabulary::kSep, TokenType::kTemplate, false);

  std::size_t response_cost = 0;
  if (response) response_cost = response->size() + 1;  // + <eos>

  if (fixed.ex.length() + response_cost > static_cast<std::size_t>(n_ctx)) {
    throw LengthError("persona+template" + std::string(response ? "+response" : "") +
                      " occupy " + std::to_string(fixed.ex.length() + response_cost) +
                      " tokens, over the context of " + std::to_string(n_ctx));
  }

  // Keep as many recent history turns as fit, oldest dropped first.
  std::size_t budget = static_cast<std::size_t>(n_ctx) - fixed.ex.length() - response_cost;
  std::size_t first_kept = history.size();
  std::size_t used = 0;
  while (first_kept > 0) {
    std::size_t cost = history[first_kept - 1].text.size() + 1;  // + <sep>
    if (used + cost > budget) break;
    used += cost;
    --first_kept;
  }

  SegmentStream out;
  for (const auto& sentence : persona) {
    out.push_words(vocab, sentence, TokenType::kPersona, false);
    out.push(Vocabulary::kSep, TokenType::kPersona, false);
  }
  for (std::size_t i = first_kept; i < history.size(); ++i) {
    TokenType type = speaker_type(history[i].speaker);
    out.push_words(vocab, history[i].text, type, false);
    out.push(Vocabulary::kSep, type, false);
  }
  out.push_words(vocab, tmpl_words, TokenType::kTemplate, false);
  out.push(Vocabulary::kSep, TokenType::kTemplate, false);
  if (response) {
    out.push_words(vocab, *response, TokenType::kResponse, true);
    out.push(Vocabulary::kEos, TokenType::kResponse, true);
  }
  return out.ex;
}

TemplateSampler::TemplateSampler(std::vector<templating::TokenMaskVector> masks,
                                 templating::TemplateSamplerConfig config)
    : masks_(std::move(masks)), config_(config) {}

templating::Template TemplateSampler::sample(std::size_t index, const Words& response,
                                             std::uint64_t epoch) const {
  if (index >= masks_.size()) throw PreconditionError("template sampler index out of range");
  Rng rng = derive_rng(config_.rng_seed, index, epoch);
  return templating::sample_training_template(response, masks_[index], config_, rng);
}

std::unique_ptr<model::SequenceModel> train_recombiner(
    const std::vector<corpus::DialogueSample>& corpus, const TemplateSampler& sampler,
    const std::vector<corpus::DialogueSample>& valid, const TemplateSampler* valid_sampler,
    RecombinerConfig config, const model::Vocabulary* shared_vocab,
    const PipelineValidationFn& validation_override, model::TrainResult* result_out) {
  if (corpus.empty()) throw PreconditionError("empty training corpus");
  if (sampler.size() != corpus.size()) {
    throw ConfigError("template sampler covers " + std::to_string(sampler.size()) +
                      " samples, corpus has " + std::to_string(corpus.size()));
  }
  if (!valid.empty() && (!valid_sampler || valid_sampler->size() != valid.size())) {
    throw ConfigError("validation corpus requires an aligned template sampler");
  }

  Vocabulary vocab;
  if (shared_vocab) {
    vocab = *shared_vocab;
  } else {
    std::vector<Words> sources;
    auto add_sample = [&](const corpus::DialogueSample& s) {
      sources.push_back(s.response);
      for (const auto& p : s.persona) sources.push_back(p);
      for (const auto& t : s.history) sources.push_back(t.text);
    };
    for (const auto& s : corpus) add_sample(s);
    for (const auto& s : valid) add_sample(s);
    vocab = Vocabulary::build(sources);
  }
  config.core.vocab_size = vocab.size();

  const bool has_validation = validation_override != nullptr || !valid.empty();
  if (!has_validation) config.train.eval_interval = 0;

  auto model = std::make_unique<model::SequenceModel>(config.core, vocab,
                                                      config.train.seed);

  auto encode_visit = [&](const corpus::DialogueSample& s, const TemplateSampler& sam,
                          std::size_t index, std::uint64_t epoch) {
    templating::Template tmpl = sam.sample(index, s.response, epoch);
    return serialize(model->vocab(), s.history, tmpl, s.persona, &s.response,
                     config.core.n_ctx);
  };

  model::BatchRunner eval_runner(0, config.train.threads);
  auto validation = [&]() -> double {
    if (validation_override) return validation_override(*model);
    if (valid.empty()) return 0.0;
    std::vector<double> losses(valid.size()), tokens(valid.size());
    eval_runner.run_eval(valid.size(), [&](std::size_t i, model::Workspace& ws) {
      auto ex = encode_visit(valid[i], *valid_sampler, i, TemplateSampler::kValidationEpoch);
      double l = model->example_loss(ex, config.label_smoothing, ws);
      std::size_t t = 0;
      for (auto m : ex.loss_mask) t += m;
      losses[i] = l;
      tokens[i] = static_cast<double>(t);
      return l;
    });
    double ls = 0.0, ts = 0.0;
    for (std::size_t i = 0; i < valid.size(); ++i) {
      ls += losses[i];
      ts += tokens[i];
    }
    return ts > 0 ? ls / ts : 0.0;
  };

  std::vector<double> best_params;
  auto result = model::run_training(
      corpus.size(), model->params(),
      [&](const model::Visit& v, double* grad, model::Workspace& ws) {
        auto ex = encode_visit(corpus[v.data_index], sampler, v.data_index, v.epoch);
        return model->example_loss_and_grad(ex, config.label_smoothing, ws, grad);
      },
      validation, [&](std::uint64_t, double) { best_params = model->params(); },
      config.train);

  if (has_validation && !best_params.empty()) model->params() = best_params;
  model->set_step_count(result.steps_run);
  if (result_out) *result_out = std::move(result);
  return model;
}

GenerateResult generate(const model::SequenceModel& model,
                        const std::vector<corpus::DialogueTurn>& history,
                        const templating::Template& tmpl,
                        const std::vector<Words>& persona, int max_decode_length) {
  EncodedExample prefix =
      serialize(model.vocab(), history, tmpl, persona, nullptr, model.core().n_ctx);
  GenerateResult result;
  std::vector<int> ids = model.generate(prefix, TokenType::kResponse, max_decode_length,
                                        &result.truncated);
  result.words.reserve(ids.size());
  for (int id : ids) result.words.push_back(model.vocab().word(id));
  return result;
}

GenerateResult generate_strict(const model::SequenceModel& model,
                               const std::vector<corpus::DialogueTurn>& history,
                               const templating::Template& tmpl,
                               const std::vector<Words>& persona, int max_decode_length,
                               int span_budget) {
  const Vocabulary& vocab = model.vocab();
  EncodedExample ex =
      serialize(vocab, history, tmpl, persona, nullptr, model.core().n_ctx);
  GenerateResult result;

  auto room = [&] {
    return ex.length() < static_cast<std::size_t>(model.core().n_ctx) &&
           result.words.size() < static_cast<std::size_t>(max_decode_length);
  };
  auto force = [&](const std::string& word) {
    if (!room()) {
      result.truncated = true;
      return false;
    }
    ex.token_ids.push_back(vocab.id(word));
    ex.type_ids.push_back(static_cast<int>(TokenType::kResponse));
    ex.loss_mask.push_back(0);
    result.words.push_back(word);
    return true;
  };

  for (std::size_t seg = 0; seg < tmpl.segments.size() && !result.truncated; ++seg) {
    const auto& segment = tmpl.segments[seg];
    if (!segment.is_mask) {
      for (const auto& w : segment.words) {
        if (!force(w)) break;
      }
      continue;
    }
    // The word that ends this span: the first word of the next literal run.
    int closing_id = -1;
    for (std::size_t next = seg + 1; next < tmpl.segments.size(); ++next) {
      if (!tmpl.segments[next].is_mask && !tmpl.segments[next].words.empty()) {
        closing_id = vocab.id(tmpl.segments[next].words.front());
        break;
      }
    }
    for (int filled = 0; filled < span_budget; ++filled) {
      if (!room()) {
        result.truncated = true;
        break;
      }
      EncodedExample probe = ex;
      bool trunc = false;
      std::vector<int> next = model.generate(probe, TokenType::kResponse, 1, &trunc);
      if (next.empty()) break;  // model wants <eos>
      if (next[0] == closing_id) break;
      force(vocab.word(next[0]));
    }
  }
  return result;
}

}  // namespace gme::recombiner
