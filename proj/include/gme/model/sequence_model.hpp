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

#ifndef GME_MODEL_SEQUENCE_MODEL_HPP_
#define GME_MODEL_SEQUENCE_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gme/model/transformer.hpp"
#include "gme/model/vocab.hpp"

namespace gme::model {

// Decoder language model over an encoded segment stream. The loss reads the
// positions flagged by loss_mask: the token at a flagged position is predicted
// from the hidden state one step earlier.
class SequenceModel {
 public:
  SequenceModel(CoreConfig core, Vocabulary vocab, std::uint64_t seed);

  // Label-smoothed cross entropy summed over flagged positions. The optional
  // embed_offset ([T, d_model]) is added to the embedding sums, which is what
  // finite-difference probes perturb.
  double example_loss(const EncodedExample& example, double smoothing, Workspace& ws,
                      const double* embed_offset = nullptr) const;

  // Loss plus gradients. param_grad (size param_count()) accumulates; the
  // optional embed_grad ([T, d_model]) receives d(loss)/d(embedding sums).
  double example_loss_and_grad(const EncodedExample& example, double smoothing,
                               Workspace& ws, double* param_grad,
                               double* embed_grad = nullptr) const;

  // Greedy continuation of the prefix with new tokens typed `response_type`.
  // Stops at <eos>; sets *truncated when the budget or the context runs out.
  std::vector<int> generate(const EncodedExample& prefix, TokenType response_type,
                            int max_new_tokens, bool* truncated) const;

  // Teacher-forced argmax accuracy over flagged positions.
  std::pair<std::size_t, std::size_t> count_correct(const EncodedExample& example,
                                                    Workspace& ws) const;

  const CoreConfig& core() const { return stack_.config(); }
  const Vocabulary& vocab() const { return vocab_; }
  const TransformerStack& stack() const { return stack_; }

  std::size_t param_count() const { return store_.size(); }
  std::vector<double>& params() { return store_.values(); }
  const std::vector<double>& params() const { return store_.values(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }

  // Parameters are immutable during inference, so concurrent forward calls
  // with distinct workspaces are safe.
  bool thread_safe_inference() const { return true; }

  void save(const std::string& dir, const std::string& kind,
            const nlohmann::json& extra = {}) const;
  static std::unique_ptr<SequenceModel> load(const std::string& dir,
                                             const std::string& expected_kind,
                                             nlohmann::json* extra_out = nullptr);

 private:
  ParamStore store_;
  TransformerStack stack_;
  TensorRef lm_w_, lm_b_;  // lm_w_ absent when the head is tied
  Vocabulary vocab_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_count_ = 0;

  double logits_from_hidden(const double* params, const double* h, double* logits) const;

  double loss_impl(const EncodedExample& example, double smoothing, Workspace& ws,
                   bool with_grad, double* param_grad, double* embed_grad,
                   const double* embed_offset) const;
};

}  // namespace gme::model

#endif  // GME_MODEL_SEQUENCE_MODEL_HPP_
