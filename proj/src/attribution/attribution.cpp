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

#include "gme/attribution/attribution.hpp"

#include <cmath>

#include "gme/common/error.hpp"

namespace gme::attribution {

using model::EncodedExample;
using model::TokenType;
using model::Vocabulary;

ResponsePersonaEncoding encode_response_persona(const Vocabulary& vocab,
                                                const Words& response,
                                                const std::vector<Words>& persona,
                                                int n_ctx) {
  if (response.empty()) throw PreconditionError("response is empty");
  if (persona.empty()) throw PreconditionError("persona is empty");

  ResponsePersonaEncoding enc;
  auto& ex = enc.example;
  auto push = [&](int tok, TokenType type, bool loss) {
    ex.token_ids.push_back(tok);
    ex.type_ids.push_back(static_cast<int>(type));
    ex.loss_mask.push_back(loss ? 1 : 0);
  };

  for (const auto& w : response) {
    enc.response_word_positions.push_back({ex.token_ids.size()});
    push(vocab.id(w), TokenType::kResponse, false);
  }
  for (const auto& sentence : persona) {
    push(Vocabulary::kSep, TokenType::kPersona, false);
    for (const auto& w : sentence) push(vocab.id(w), TokenType::kPersona, true);
  }
  push(Vocabulary::kEos, TokenType::kPersona, true);

  if (ex.length() > static_cast<std::size_t>(n_ctx)) {
    throw LengthError("response+persona length " + std::to_string(ex.length()) +
                      " exceeds context " + std::to_string(n_ctx));
  }
  return enc;
}

std::unique_ptr<model::SequenceModel> train_response_to_persona(
    const std::vector<corpus::DialogueSample>& corpus,
    const std::vector<corpus::DialogueSample>& valid, AttributionConfig config,
    const model::Vocabulary* shared_vocab, model::TrainResult* result_out) {
  if (corpus.empty()) throw PreconditionError("empty training corpus");

  std::vector<const corpus::DialogueSample*> train_ptr, valid_ptr;
  if (valid.empty()) {
    // Hold out a tail slice, at least one sample.
    std::size_t n_valid = std::max<std::size_t>(1, corpus.size() / 10);
    if (n_valid >= corpus.size()) n_valid = corpus.size() - 1;
    for (std::size_t i = 0; i + n_valid < corpus.size(); ++i) train_ptr.push_back(&corpus[i]);
    for (std::size_t i = corpus.size() - n_valid; i < corpus.size(); ++i) {
      valid_ptr.push_back(&corpus[i]);
    }
    if (train_ptr.empty()) train_ptr.push_back(&corpus[0]);
  } else {
    for (const auto& s : corpus) train_ptr.push_back(&s);
    for (const auto& s : valid) valid_ptr.push_back(&s);
  }

  Vocabulary vocab;
  if (shared_vocab) {
    vocab = *shared_vocab;
  } else {
    std::vector<Words> sources;
    for (const auto* s : train_ptr) {
      sources.push_back(s->response);
      for (const auto& p : s->persona) sources.push_back(p);
      for (const auto& t : s->history) sources.push_back(t.text);
    }
    for (const auto* s : valid_ptr) {
      sources.push_back(s->response);
      for (const auto& p : s->persona) sources.push_back(p);
    }
    vocab = Vocabulary::build(sources);
  }
  config.core.vocab_size = vocab.size();

  auto model = std::make_unique<model::SequenceModel>(config.core, vocab,
                                                      config.train.seed);

  auto encode_sample = [&](const corpus::DialogueSample& s) {
    return encode_response_persona(model->vocab(), s.response, s.persona,
                                   config.core.n_ctx);
  };

  std::vector<double> best_params;
  model::BatchRunner eval_runner(0, config.train.threads);
  auto validation = [&]() {
    // Mean per-token persona NLL over the validation slice.
    std::vector<double> token_counts(valid_ptr.size());
    double loss_sum = 0.0, token_sum = 0.0;
    std::vector<double> losses(valid_ptr.size());
    eval_runner.run_eval(valid_ptr.size(), [&](std::size_t i, model::Workspace& ws) {
      auto enc = encode_sample(*valid_ptr[i]);
      double l = model->example_loss(enc.example, 0.0, ws);
      std::size_t toks = 0;
      for (auto m : enc.example.loss_mask) toks += m;
      losses[i] = l;
      token_counts[i] = static_cast<double>(toks);
      return l;
    });
    for (std::size_t i = 0; i < valid_ptr.size(); ++i) {
      loss_sum += losses[i];
      token_sum += token_counts[i];
    }
    return token_sum > 0 ? loss_sum / token_sum : 0.0;
  };

  auto result = model::run_training(
      train_ptr.size(), model->params(),
      [&](const model::Visit& v, double* grad, model::Workspace& ws) {
        auto enc = encode_sample(*train_ptr[v.data_index]);
        return model->example_loss_and_grad(enc.example, 0.0, ws, grad);
      },
      validation,
      [&](std::uint64_t, double) { best_params = model->params(); },
      config.train);

  if (!valid_ptr.empty() && !best_params.empty()) model->params() = best_params;
  model->set_step_count(result.steps_run);
  if (result_out) *result_out = std::move(result);
  return model;
}

SaliencyComputer::SaliencyComputer(const model::SequenceModel& model)
    : model_(model), grad_scratch_(model.param_count(), 0.0) {}

SaliencyScores SaliencyComputer::compute(const Words& response,
                                         const std::vector<Words>& persona) {
  auto enc = encode_response_persona(model_.vocab(), response, persona,
                                     model_.core().n_ctx);
  const std::size_t d = static_cast<std::size_t>(model_.core().d_model);
  embed_grad_.assign(enc.example.length() * d, 0.0);
  grad_scratch_.assign(grad_scratch_.size(), 0.0);
  model_.example_loss_and_grad(enc.example, 0.0, ws_, grad_scratch_.data(),
                               embed_grad_.data());

  SaliencyScores scores;
  scores.per_token_norm.reserve(response.size());
  for (const auto& positions : enc.response_word_positions) {
    double sq = 0.0;
    for (std::size_t pos : positions) {
      const double* g = embed_grad_.data() + pos * d;
      for (std::size_t k = 0; k < d; ++k) sq += g[k] * g[k];
    }
    scores.per_token_norm.push_back(std::sqrt(sq));
  }
  return scores;
}

SaliencyScores gradient_saliency(const model::SequenceModel& model, const Words& response,
                                 const std::vector<Words>& persona) {
  SaliencyComputer computer(model);
  return computer.compute(response, persona);
}

std::set<std::size_t> gradient_set(const SaliencyScores& scores, double delta) {
  if (delta <= 0.0) throw PreconditionError("delta must be positive");
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < scores.per_token_norm.size(); ++i) {
    if (scores.per_token_norm[i] > delta) out.insert(i);
  }
  return out;
}

}  // namespace gme::attribution
