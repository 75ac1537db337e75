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

#ifndef GME_RECOMBINER_RECOMBINER_HPP_
#define GME_RECOMBINER_RECOMBINER_HPP_

#include <memory>
#include <optional>
#include <vector>

#include "gme/corpus/types.hpp"
#include "gme/model/sequence_model.hpp"
#include "gme/model/trainer.hpp"
#include "gme/templating/ops.hpp"

namespace gme::recombiner {

inline constexpr const char* kCheckpointKind = "recombiner";

using EncodedExample = model::EncodedExample;

// Segment order: persona sentences, history turns oldest first, template,
// then (training only) the response closed by <eos>. Each segment ends with a
// separator carrying the segment's type id; the two speakers get distinct
// history types. When the stream overflows the context, the oldest history
// turns are dropped first; persona and template are never dropped.
EncodedExample serialize(const model::Vocabulary& vocab,
                         const std::vector<corpus::DialogueTurn>& history,
                         const templating::Template& tmpl,
                         const std::vector<Words>& persona,
                         const Words* response,  // nullptr at inference
                         int n_ctx);

// Draws a fresh training template per data visit; the base span-mask vector
// per sample is fixed (it comes from saliency + overlap), while sentence
// deletion and noise are resampled from the per-visit stream.
class TemplateSampler {
 public:
  TemplateSampler(std::vector<templating::TokenMaskVector> masks,
                  templating::TemplateSamplerConfig config);

  templating::Template sample(std::size_t index, const Words& response,
                              std::uint64_t epoch) const;

  std::size_t size() const { return masks_.size(); }
  const templating::TemplateSamplerConfig& config() const { return config_; }
  const templating::TokenMaskVector& mask(std::size_t index) const { return masks_[index]; }

  // Reserved epoch for validation so the templates stay fixed across evals.
  static constexpr std::uint64_t kValidationEpoch = ~std::uint64_t{0};

 private:
  std::vector<templating::TokenMaskVector> masks_;
  templating::TemplateSamplerConfig config_;
};

struct RecombinerConfig {
  model::CoreConfig core;
  double label_smoothing = 0.1;
  int max_decode_length = 64;
  model::TrainLoopConfig train;
};

// Smaller-is-better validation metric computed on the in-training model,
// e.g. the negated pipeline Average.
using PipelineValidationFn = std::function<double(const model::SequenceModel&)>;

// Denoising training: token-level smoothed cross entropy over response
// positions only, with the template resampled on every visit.
std::unique_ptr<model::SequenceModel> train_recombiner(
    const std::vector<corpus::DialogueSample>& corpus, const TemplateSampler& sampler,
    const std::vector<corpus::DialogueSample>& valid, const TemplateSampler* valid_sampler,
    RecombinerConfig config, const model::Vocabulary* shared_vocab = nullptr,
    const PipelineValidationFn& validation_override = nullptr,
    model::TrainResult* result_out = nullptr);

struct GenerateResult {
  Words words;
  bool truncated = false;
};

// Greedy decoding from the response-segment start.
GenerateResult generate(const model::SequenceModel& model,
                        const std::vector<corpus::DialogueTurn>& history,
                        const templating::Template& tmpl,
                        const std::vector<Words>& persona, int max_decode_length);

// Constrained decoding that copies the template's literal segments verbatim
// and free-decodes only inside mask spans (a span closes once the model picks
// the next literal word, or at span_budget words). Off by default in the
// pipeline; preservation is normally learned, not enforced.
GenerateResult generate_strict(const model::SequenceModel& model,
                               const std::vector<corpus::DialogueTurn>& history,
                               const templating::Template& tmpl,
                               const std::vector<Words>& persona, int max_decode_length,
                               int span_budget = 8);

}  // namespace gme::recombiner

#endif  // GME_RECOMBINER_RECOMBINER_HPP_
