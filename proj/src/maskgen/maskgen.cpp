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

#include "gme/maskgen/maskgen.hpp"

#include <cmath>

#include "gme/common/error.hpp"
#include "gme/model/checkpoint.hpp"

namespace gme::maskgen {

using model::EncodedExample;
using model::TokenType;
using model::Vocabulary;

ClassFrequencies class_frequencies(const std::vector<templating::TokenMaskVector>& targets) {
  std::size_t positives = 0, total = 0;
  for (const auto& t : targets) {
    for (auto label : t.labels) {
      total += 1;
      positives += label ? 1 : 0;
    }
  }
  if (total == 0) throw ConfigError("class_frequencies: no labeled tokens");
  if (positives == 0 || positives == total) {
    throw ConfigError("class_frequencies: degenerate corpus, one class is absent");
  }
  ClassFrequencies f;
  f.f_positive = static_cast<double>(positives) / static_cast<double>(total);
  f.f_negative = 1.0 - f.f_positive;
  return f;
}

templating::TokenMaskVector MaskDecision::as_mask_vector(double threshold) const {
  templating::TokenMaskVector v;
  v.labels.reserve(confidences.size());
  for (double c : confidences) v.labels.push_back(c > threshold ? 1 : 0);
  v.confidences = confidences;
  return v;
}

namespace {
model::CoreConfig non_causal(model::CoreConfig c) {
  c.causal = false;
  return c;
}
}  // namespace

MaskTagger::MaskTagger(model::CoreConfig core, model::Vocabulary vocab,
                       ClassFrequencies frequencies, std::uint64_t seed)
    : stack_(non_causal(core), store_), vocab_(std::move(vocab)),
      frequencies_(frequencies), seed_(seed) {
  if (stack_.config().vocab_size != vocab_.size()) {
    throw ConfigError("core vocab_size does not match the vocabulary");
  }
  if (frequencies_.f_positive <= 0.0 || frequencies_.f_negative <= 0.0 ||
      frequencies_.f_positive >= 1.0) {
    throw ConfigError("invalid class frequencies");
  }
  tag_w_ = store_.add("tag.w", static_cast<std::size_t>(stack_.config().d_model), 1);
  tag_b_ = store_.add("tag.b", 1, 1);
  Rng rng(seed);
  stack_.init_params(store_, rng);
  // Tag head starts at zero: every confidence is exactly 0.5 before training.
}

MaskgenEncoding MaskTagger::encode(const std::vector<corpus::DialogueTurn>& history,
                                   const Words& response) const {
  if (response.empty()) throw PreconditionError("response is empty");
  const int n_ctx = stack_.config().n_ctx;

  std::size_t response_cost = response.size() + 1;  // + <eos>
  if (response_cost > static_cast<std::size_t>(n_ctx)) {
    throw LengthError("response length " + std::to_string(response.size()) +
                      " exceeds context " + std::to_string(n_ctx));
  }
  std::size_t budget = static_cast<std::size_t>(n_ctx) - response_cost;
  std::size_t first_kept = history.size();
  std::size_t used = 0;
  while (first_kept > 0) {
    std::size_t cost = history[first_kept - 1].text.size() + 1;
    if (used + cost > budget) break;
    used += cost;
    --first_kept;
  }

  MaskgenEncoding enc;
  auto push = [&](int tok, TokenType type, bool flag) {
    enc.example.token_ids.push_back(tok);
    enc.example.type_ids.push_back(static_cast<int>(type));
    enc.example.loss_mask.push_back(flag ? 1 : 0);
  };
  for (std::size_t i = first_kept; i < history.size(); ++i) {
    TokenType type = history[i].speaker == corpus::Speaker::kSpeaker1
                         ? TokenType::kHistorySpeaker1
                         : TokenType::kHistorySpeaker2;
    for (const auto& w : history[i].text) push(vocab_.id(w), type, false);
    push(Vocabulary::kSep, type, false);
  }
  for (const auto& w : response) {
    enc.response_word_positions.push_back(enc.example.length());
    push(vocab_.id(w), TokenType::kResponse, true);
  }
  push(Vocabulary::kEos, TokenType::kResponse, false);
  return enc;
}

namespace {
double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
}  // namespace

double MaskTagger::loss_impl(const MaskgenEncoding& enc,
                             const templating::TokenMaskVector& target,
                             model::Workspace& ws, bool with_grad, double* param_grad,
                             double* embed_grad, const double* embed_offset) const {
  if (target.labels.size() != enc.response_word_positions.size()) {
    throw PreconditionError("target length does not match response length");
  }
  const std::size_t d = static_cast<std::size_t>(stack_.config().d_model);
  const double* params = store_.values().data();
  stack_.forward(enc.example, params, ws, embed_offset);

  if (with_grad) ws.d_hidden.assign(enc.example.length() * d, 0.0);

  const double* w = params + tag_w_.offset;
  const double b = params[tag_b_.offset];
  double loss = 0.0;
  for (std::size_t i = 0; i < enc.response_word_positions.size(); ++i) {
    std::size_t pos = enc.response_word_positions[i];
    const double* h = ws.hidden.data() + pos * d;
    double z = b;
    for (std::size_t k = 0; k < d; ++k) z += h[k] * w[k];
    bool positive = target.labels[i] != 0;
    double weight = frequencies_.weight(positive);
    // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
    loss += weight * (positive ? softplus(-z) : softplus(z));

    if (with_grad) {
      double p = 1.0 / (1.0 + std::exp(-z));
      double dz = weight * (p - (positive ? 1.0 : 0.0));
      double* dh = ws.d_hidden.data() + pos * d;
      double* dw = param_grad + tag_w_.offset;
      for (std::size_t k = 0; k < d; ++k) {
        dh[k] += dz * w[k];
        dw[k] += dz * h[k];
      }
      param_grad[tag_b_.offset] += dz;
    }
  }
  if (with_grad) {
    stack_.backward(enc.example, params, ws, param_grad, embed_grad);
  }
  return loss;
}

double MaskTagger::example_loss(const MaskgenEncoding& enc,
                                const templating::TokenMaskVector& target,
                                model::Workspace& ws, const double* embed_offset) const {
  return loss_impl(enc, target, ws, false, nullptr, nullptr, embed_offset);
}

double MaskTagger::example_loss_and_grad(const MaskgenEncoding& enc,
                                         const templating::TokenMaskVector& target,
                                         model::Workspace& ws, double* param_grad,
                                         double* embed_grad) const {
  return loss_impl(enc, target, ws, true, param_grad, embed_grad, nullptr);
}

MaskDecision MaskTagger::predict(const std::vector<corpus::DialogueTurn>& history,
                                 const Words& response, model::Workspace& ws) const {
  MaskgenEncoding enc = encode(history, response);
  const std::size_t d = static_cast<std::size_t>(stack_.config().d_model);
  const double* params = store_.values().data();
  stack_.forward(enc.example, params, ws, nullptr);
  const double* w = params + tag_w_.offset;
  const double b = params[tag_b_.offset];
  MaskDecision decision;
  decision.confidences.reserve(response.size());
  for (std::size_t pos : enc.response_word_positions) {
    const double* h = ws.hidden.data() + pos * d;
    double z = b;
    for (std::size_t k = 0; k < d; ++k) z += h[k] * w[k];
    decision.confidences.push_back(1.0 / (1.0 + std::exp(-z)));
  }
  return decision;
}

MaskDecision MaskTagger::predict(const std::vector<corpus::DialogueTurn>& history,
                                 const Words& response) const {
  model::Workspace ws;
  return predict(history, response, ws);
}

void MaskTagger::save(const std::string& dir) const {
  nlohmann::json manifest;
  manifest["kind"] = kCheckpointKind;
  manifest["config"] = model::core_config_to_json(stack_.config());
  manifest["vocab"] = vocab_.words();
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(vocab_.hash()));
  manifest["vocab_hash"] = std::string(hash_hex);
  manifest["seed"] = seed_;
  manifest["step_count"] = step_count_;
  manifest["extra"] = {{"f_positive", frequencies_.f_positive},
                       {"f_negative", frequencies_.f_negative}};
  model::write_manifest(dir, manifest);
  model::write_params(dir, store_.values());
}

std::unique_ptr<MaskTagger> MaskTagger::load(const std::string& dir) {
  nlohmann::json manifest = model::read_manifest(dir);
  std::string kind = manifest.at("kind").get<std::string>();
  if (kind != kCheckpointKind) {
    throw ConfigError("checkpoint in " + dir + " is a \"" + kind + "\", expected \"" +
                      std::string(kCheckpointKind) + "\"");
  }
  model::CoreConfig config = model::core_config_from_json(manifest.at("config"));
  Vocabulary vocab =
      Vocabulary::from_words(manifest.at("vocab").get<std::vector<std::string>>());
  ClassFrequencies freq;
  freq.f_positive = manifest.at("extra").at("f_positive").get<double>();
  freq.f_negative = manifest.at("extra").at("f_negative").get<double>();
  auto tagger = std::make_unique<MaskTagger>(config, std::move(vocab), freq,
                                             manifest.value("seed", 0ull));
  tagger->params() = model::read_params(dir, tagger->param_count());
  tagger->set_step_count(manifest.value("step_count", 0ull));
  return tagger;
}

std::unique_ptr<MaskTagger> train_mask_classifier(
    const std::vector<corpus::DialogueSample>& corpus,
    const std::vector<templating::TokenMaskVector>& targets,
    const std::vector<corpus::DialogueSample>& valid,
    const std::vector<templating::TokenMaskVector>& valid_targets,
    const ClassFrequencies& frequencies, MaskgenConfig config,
    const model::Vocabulary* shared_vocab, model::TrainResult* result_out) {
  if (corpus.empty()) throw PreconditionError("empty training corpus");
  if (targets.size() != corpus.size()) {
    throw ConfigError("targets misaligned with the corpus");
  }
  if (valid.size() != valid_targets.size()) {
    throw ConfigError("validation targets misaligned");
  }

  Vocabulary vocab;
  if (shared_vocab) {
    vocab = *shared_vocab;
  } else {
    std::vector<Words> sources;
    auto add_sample = [&](const corpus::DialogueSample& s) {
      sources.push_back(s.response);
      for (const auto& t : s.history) sources.push_back(t.text);
    };
    for (const auto& s : corpus) add_sample(s);
    for (const auto& s : valid) add_sample(s);
    vocab = Vocabulary::build(sources);
  }
  config.core.vocab_size = vocab.size();
  config.core.causal = false;

  const bool has_validation = !valid.empty();
  if (!has_validation) config.train.eval_interval = 0;
  auto tagger = std::make_unique<MaskTagger>(config.core, vocab, frequencies,
                                             config.train.seed);

  model::BatchRunner eval_runner(0, config.train.threads);
  auto validation = [&]() -> double {
    if (valid.empty()) return 0.0;
    std::vector<double> losses(valid.size()), tokens(valid.size());
    eval_runner.run_eval(valid.size(), [&](std::size_t i, model::Workspace& ws) {
      auto enc = tagger->encode(valid[i].history, valid[i].response);
      losses[i] = tagger->example_loss(enc, valid_targets[i], ws);
      tokens[i] = static_cast<double>(valid[i].response.size());
      return losses[i];
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
      corpus.size(), tagger->params(),
      [&](const model::Visit& v, double* grad, model::Workspace& ws) {
        auto enc = tagger->encode(corpus[v.data_index].history,
                                  corpus[v.data_index].response);
        return tagger->example_loss_and_grad(enc, targets[v.data_index], ws, grad);
      },
      validation, [&](std::uint64_t, double) { best_params = tagger->params(); },
      config.train);

  if (has_validation && !best_params.empty()) tagger->params() = best_params;
  tagger->set_step_count(result.steps_run);
  if (result_out) *result_out = std::move(result);
  return tagger;
}

MaskDecision predict_mask(const MaskTagger& classifier,
                          const std::vector<corpus::DialogueTurn>& history,
                          const Words& response) {
  return classifier.predict(history, response);
}

}  // namespace gme::maskgen
