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

#include "gme/model/sequence_model.hpp"

#include <cmath>
#include <cstring>

#include "gme/common/error.hpp"
#include "gme/model/checkpoint.hpp"

namespace gme::model {

SequenceModel::SequenceModel(CoreConfig core, Vocabulary vocab, std::uint64_t seed)
    : stack_(core, store_), vocab_(std::move(vocab)), seed_(seed) {
  if (core.vocab_size != vocab_.size()) {
    throw ConfigError("core vocab_size does not match the vocabulary");
  }
  if (!core.tied_lm) {
    lm_w_ = store_.add("lm.w", static_cast<std::size_t>(core.d_model),
                       static_cast<std::size_t>(core.vocab_size));
  }
  lm_b_ = store_.add("lm.b", 1, static_cast<std::size_t>(core.vocab_size));
  Rng rng(seed);
  stack_.init_params(store_, rng);
  if (!core.tied_lm) {
    double* w = store_.data(lm_w_);
    for (std::size_t i = 0; i < lm_w_.count(); ++i) w[i] = 0.02 * rng.gauss();
  }
  double* b = store_.data(lm_b_);
  for (std::size_t i = 0; i < lm_b_.count(); ++i) b[i] = 0.0;
}

// Fills `logits` for one hidden state and returns the log-sum-exp.
double SequenceModel::logits_from_hidden(const double* params, const double* h,
                                         double* logits) const {
  const std::size_t d = static_cast<std::size_t>(core().d_model);
  const std::size_t v = static_cast<std::size_t>(core().vocab_size);
  const double* b = params + lm_b_.offset;
  if (core().tied_lm) {
    const double* emb = params + stack_.tok_emb().offset;
    for (std::size_t j = 0; j < v; ++j) {
      const double* ej = emb + j * d;
      double s = b[j];
      for (std::size_t k = 0; k < d; ++k) s += ej[k] * h[k];
      logits[j] = s;
    }
  } else {
    const double* w = params + lm_w_.offset;
    std::memcpy(logits, b, v * sizeof(double));
    for (std::size_t k = 0; k < d; ++k) {
      double a = h[k];
      const double* wk = w + k * v;
      for (std::size_t j = 0; j < v; ++j) logits[j] += a * wk[j];
    }
  }
  double maxv = logits[0];
  for (std::size_t j = 1; j < v; ++j) maxv = std::max(maxv, logits[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < v; ++j) sum += std::exp(logits[j] - maxv);
  return maxv + std::log(sum);
}

double SequenceModel::loss_impl(const EncodedExample& example, double smoothing,
                                Workspace& ws, bool with_grad, double* param_grad,
                                double* embed_grad, const double* embed_offset) const {
  const std::size_t t_len = example.length();
  if (example.type_ids.size() != t_len || example.loss_mask.size() != t_len) {
    throw PreconditionError("encoded example field lengths differ");
  }
  const std::size_t d = static_cast<std::size_t>(core().d_model);
  const std::size_t v = static_cast<std::size_t>(core().vocab_size);
  const double* params = store_.values().data();

  stack_.forward(example, params, ws, embed_offset);

  ws.logits.resize(v);
  if (with_grad) {
    ws.d_hidden.assign(t_len * d, 0.0);
  }

  double loss = 0.0;
  for (std::size_t i = 1; i < t_len; ++i) {
    if (!example.loss_mask[i]) continue;
    const double* h = ws.hidden.data() + (i - 1) * d;
    double lse = logits_from_hidden(params, h, ws.logits.data());
    int target = example.token_ids[i];
    double nll = lse - ws.logits[static_cast<std::size_t>(target)];
    if (smoothing > 0.0) {
      double uniform_ce = 0.0;
      for (std::size_t j = 0; j < v; ++j) uniform_ce += lse - ws.logits[j];
      uniform_ce /= static_cast<double>(v);
      loss += (1.0 - smoothing) * nll + smoothing * uniform_ce;
    } else {
      loss += nll;
    }

    if (with_grad) {
      // dlogits = softmax - q, q = (1-eps) one_hot + eps/V.
      double* dh = ws.d_hidden.data() + (i - 1) * d;
      double* db = param_grad + lm_b_.offset;
      const double uniform = smoothing / static_cast<double>(v);
      ws.d_scores.resize(v);
      double* dl = ws.d_scores.data();
      for (std::size_t j = 0; j < v; ++j) {
        dl[j] = std::exp(ws.logits[j] - lse) - uniform;
        db[j] += dl[j];
      }
      dl[static_cast<std::size_t>(target)] -= 1.0 - smoothing;
      db[static_cast<std::size_t>(target)] -= 1.0 - smoothing;
      if (core().tied_lm) {
        const double* emb = params + stack_.tok_emb().offset;
        double* demb = param_grad + stack_.tok_emb().offset;
        for (std::size_t j = 0; j < v; ++j) {
          double g = dl[j];
          if (g == 0.0) continue;
          const double* ej = emb + j * d;
          double* dej = demb + j * d;
          for (std::size_t k = 0; k < d; ++k) {
            dej[k] += g * h[k];
            dh[k] += g * ej[k];
          }
        }
      } else {
        const double* w = params + lm_w_.offset;
        double* dw = param_grad + lm_w_.offset;
        for (std::size_t k = 0; k < d; ++k) {
          double a = h[k];
          const double* wk = w + k * v;
          double* dwk = dw + k * v;
          double s = 0.0;
          for (std::size_t j = 0; j < v; ++j) {
            dwk[j] += a * dl[j];
            s += wk[j] * dl[j];
          }
          dh[k] += s;
        }
      }
    }
  }

  if (with_grad) {
    stack_.backward(example, params, ws, param_grad, embed_grad);
  }
  return loss;
}

double SequenceModel::example_loss(const EncodedExample& example, double smoothing,
                                   Workspace& ws, const double* embed_offset) const {
  return loss_impl(example, smoothing, ws, false, nullptr, nullptr, embed_offset);
}

double SequenceModel::example_loss_and_grad(const EncodedExample& example, double smoothing,
                                            Workspace& ws, double* param_grad,
                                            double* embed_grad) const {
  return loss_impl(example, smoothing, ws, true, param_grad, embed_grad, nullptr);
}

std::vector<int> SequenceModel::generate(const EncodedExample& prefix,
                                         TokenType response_type, int max_new_tokens,
                                         bool* truncated) const {
  if (prefix.length() == 0) throw PreconditionError("empty generation prefix");
  const std::size_t d = static_cast<std::size_t>(core().d_model);
  const std::size_t v = static_cast<std::size_t>(core().vocab_size);
  const double* params = store_.values().data();

  EncodedExample ex = prefix;
  Workspace ws;
  std::vector<int> out;
  if (truncated) *truncated = false;
  for (int step = 0; step < max_new_tokens; ++step) {
    if (ex.length() >= static_cast<std::size_t>(core().n_ctx)) {
      if (truncated) *truncated = true;
      break;
    }
    stack_.forward(ex, params, ws, nullptr);
    ws.logits.resize(v);
    const double* h = ws.hidden.data() + (ex.length() - 1) * d;
    logits_from_hidden(params, h, ws.logits.data());
    int best = 0;
    double best_v = ws.logits[0];
    for (std::size_t j = 1; j < v; ++j) {
      if (ws.logits[j] > best_v) {
        best_v = ws.logits[j];
        best = static_cast<int>(j);
      }
    }
    if (best == Vocabulary::kEos) return out;
    out.push_back(best);
    ex.token_ids.push_back(best);
    ex.type_ids.push_back(static_cast<int>(response_type));
    ex.loss_mask.push_back(0);
  }
  if (truncated && out.size() == static_cast<std::size_t>(max_new_tokens)) {
    *truncated = true;
  }
  return out;
}

std::pair<std::size_t, std::size_t> SequenceModel::count_correct(
    const EncodedExample& example, Workspace& ws) const {
  const std::size_t d = static_cast<std::size_t>(core().d_model);
  const std::size_t v = static_cast<std::size_t>(core().vocab_size);
  const double* params = store_.values().data();
  stack_.forward(example, params, ws, nullptr);
  ws.logits.resize(v);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 1; i < example.length(); ++i) {
    if (!example.loss_mask[i]) continue;
    const double* h = ws.hidden.data() + (i - 1) * d;
    logits_from_hidden(params, h, ws.logits.data());
    int best = 0;
    double best_v = ws.logits[0];
    for (std::size_t j = 1; j < v; ++j) {
      if (ws.logits[j] > best_v) {
        best_v = ws.logits[j];
        best = static_cast<int>(j);
      }
    }
    ++total;
    if (best == example.token_ids[i]) ++correct;
  }
  return {correct, total};
}

void SequenceModel::save(const std::string& dir, const std::string& kind,
                         const nlohmann::json& extra) const {
  nlohmann::json manifest;
  manifest["kind"] = kind;
  manifest["config"] = core_config_to_json(core());
  manifest["vocab"] = vocab_.words();
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(vocab_.hash()));
  manifest["vocab_hash"] = std::string(hash_hex);
  manifest["seed"] = seed_;
  manifest["step_count"] = step_count_;
  if (!extra.is_null() && !extra.empty()) manifest["extra"] = extra;
  write_manifest(dir, manifest);
  write_params(dir, store_.values());
}

std::unique_ptr<SequenceModel> SequenceModel::load(const std::string& dir,
                                                   const std::string& expected_kind,
                                                   nlohmann::json* extra_out) {
  nlohmann::json manifest = read_manifest(dir);
  std::string kind = manifest.at("kind").get<std::string>();
  if (kind != expected_kind) {
    throw ConfigError("checkpoint in " + dir + " is a \"" + kind + "\", expected \"" +
                      expected_kind + "\"");
  }
  CoreConfig config = core_config_from_json(manifest.at("config"));
  Vocabulary vocab = Vocabulary::from_words(
      manifest.at("vocab").get<std::vector<std::string>>());
  auto model = std::make_unique<SequenceModel>(config, std::move(vocab),
                                               manifest.value("seed", 0ull));
  model->params() = read_params(dir, model->param_count());
  model->set_step_count(manifest.value("step_count", 0ull));
  if (extra_out) *extra_out = manifest.value("extra", nlohmann::json::object());
  return model;
}

}  // namespace gme::model
