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

#ifndef GME_ATTRIBUTION_ATTRIBUTION_HPP_
#define GME_ATTRIBUTION_ATTRIBUTION_HPP_

#include <memory>
#include <set>
#include <vector>

#include "gme/corpus/types.hpp"
#include "gme/model/sequence_model.hpp"
#include "gme/model/trainer.hpp"

namespace gme::attribution {

inline constexpr const char* kCheckpointKind = "response-to-persona";

// Per-response-word L2 norms of the persona-loss gradient w.r.t. the word's
// input embeddings.
struct SaliencyScores {
  std::vector<double> per_token_norm;
};

struct ResponsePersonaEncoding {
  model::EncodedExample example;
  // Token positions of each response word (one entry per word).
  std::vector<std::vector<std::size_t>> response_word_positions;
};

// Stream layout: response words, then each persona sentence introduced by a
// separator, closed by <eos>. The loss covers the persona continuation.
ResponsePersonaEncoding encode_response_persona(const model::Vocabulary& vocab,
                                                const Words& response,
                                                const std::vector<Words>& persona,
                                                int n_ctx);

struct AttributionConfig {
  model::CoreConfig core;  // vocab_size filled from the corpus at train time
  model::TrainLoopConfig train;
};

// Maximizes persona log-likelihood given the response as conditioning prefix.
// `valid` may be empty, in which case a tail slice of the corpus is held out.
// A shared vocabulary may be supplied so sibling models bind the same hash.
std::unique_ptr<model::SequenceModel> train_response_to_persona(
    const std::vector<corpus::DialogueSample>& corpus,
    const std::vector<corpus::DialogueSample>& valid, AttributionConfig config,
    const model::Vocabulary* shared_vocab = nullptr,
    model::TrainResult* result_out = nullptr);

// Reusable saliency evaluator (owns its gradient scratch buffers).
class SaliencyComputer {
 public:
  explicit SaliencyComputer(const model::SequenceModel& model);
  SaliencyScores compute(const Words& response, const std::vector<Words>& persona);

 private:
  const model::SequenceModel& model_;
  std::vector<double> grad_scratch_;
  std::vector<double> embed_grad_;
  model::Workspace ws_;
};

SaliencyScores gradient_saliency(const model::SequenceModel& model, const Words& response,
                                 const std::vector<Words>& persona);

// Indices with norm strictly greater than delta.
std::set<std::size_t> gradient_set(const SaliencyScores& scores, double delta);

}  // namespace gme::attribution

#endif  // GME_ATTRIBUTION_ATTRIBUTION_HPP_
