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

#ifndef GME_MASKGEN_MASKGEN_HPP_
#define GME_MASKGEN_MASKGEN_HPP_

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gme/corpus/types.hpp"
#include "gme/model/trainer.hpp"
#include "gme/model/vocab.hpp"
#include "gme/templating/template.hpp"

namespace gme::maskgen {

inline constexpr const char* kCheckpointKind = "mask-generator";

struct ClassFrequencies {
  double f_positive = 0.0;
  double f_negative = 0.0;

  double weight(bool positive) const { return positive ? 1.0 / f_positive : 1.0 / f_negative; }
};

// Corpus-level frequency of the mask labels. Throws ConfigError when either
// class is absent.
ClassFrequencies class_frequencies(const std::vector<templating::TokenMaskVector>& targets);

// Per-response-word mask probabilities.
struct MaskDecision {
  std::vector<double> confidences;

  templating::TokenMaskVector as_mask_vector(double threshold = 0.5) const;
};

struct MaskgenEncoding {
  model::EncodedExample example;
  std::vector<std::size_t> response_word_positions;
};

// Bidirectional encoder over (history, response) with a per-token sigmoid
// head. The encoding has no persona segment at all; Eq-style conditioning on
// (c, r) only is structural.
class MaskTagger {
 public:
  MaskTagger(model::CoreConfig core, model::Vocabulary vocab, ClassFrequencies frequencies,
             std::uint64_t seed);

  MaskgenEncoding encode(const std::vector<corpus::DialogueTurn>& history,
                         const Words& response) const;

  // Inverse-frequency-weighted binary cross entropy summed over the response
  // positions of one sample. embed_offset supports finite-difference probes.
  double example_loss(const MaskgenEncoding& enc, const templating::TokenMaskVector& target,
                      model::Workspace& ws, const double* embed_offset = nullptr) const;
  double example_loss_and_grad(const MaskgenEncoding& enc,
                               const templating::TokenMaskVector& target,
                               model::Workspace& ws, double* param_grad,
                               double* embed_grad = nullptr) const;

  MaskDecision predict(const std::vector<corpus::DialogueTurn>& history,
                       const Words& response, model::Workspace& ws) const;
  MaskDecision predict(const std::vector<corpus::DialogueTurn>& history,
                       const Words& response) const;

  const model::CoreConfig& core() const { return stack_.config(); }
  const model::Vocabulary& vocab() const { return vocab_; }
  const ClassFrequencies& frequencies() const { return frequencies_; }

  std::size_t param_count() const { return store_.size(); }
  std::vector<double>& params() { return store_.values(); }
  const std::vector<double>& params() const { return store_.values(); }

  std::uint64_t step_count() const { return step_count_; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }
  bool thread_safe_inference() const { return true; }

  void save(const std::string& dir) const;
  static std::unique_ptr<MaskTagger> load(const std::string& dir);

 private:
  model::ParamStore store_;
  model::TransformerStack stack_;
  model::TensorRef tag_w_, tag_b_;
  model::Vocabulary vocab_;
  ClassFrequencies frequencies_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_count_ = 0;

  double loss_impl(const MaskgenEncoding& enc, const templating::TokenMaskVector& target,
                   model::Workspace& ws, bool with_grad, double* param_grad,
                   double* embed_grad, const double* embed_offset) const;
};

struct MaskgenConfig {
  model::CoreConfig core;  // causal is forced off
  model::TrainLoopConfig train;
};

std::unique_ptr<MaskTagger> train_mask_classifier(
    const std::vector<corpus::DialogueSample>& corpus,
    const std::vector<templating::TokenMaskVector>& targets,
    const std::vector<corpus::DialogueSample>& valid,
    const std::vector<templating::TokenMaskVector>& valid_targets,
    const ClassFrequencies& frequencies, MaskgenConfig config,
    const model::Vocabulary* shared_vocab = nullptr,
    model::TrainResult* result_out = nullptr);

MaskDecision predict_mask(const MaskTagger& classifier,
                          const std::vector<corpus::DialogueTurn>& history,
                          const Words& response);

}  // namespace gme::maskgen

#endif  // GME_MASKGEN_MASKGEN_HPP_
