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

#include "gme/editor/editor.hpp"

#include "gme/common/error.hpp"

namespace gme::editor {

EditResult edit(const std::vector<corpus::DialogueTurn>& history,
                const Words& original_response, const std::vector<Words>& editing_persona,
                const maskgen::MaskTagger& mask_model,
                const model::SequenceModel& recombiner_model, const EditorOptions& options) {
  if (mask_model.vocab().hash() != recombiner_model.vocab().hash()) {
    throw ConfigError("mask generator and recombiner were trained on different "
                      "vocabularies (manifest hash mismatch)");
  }

  EditResult result;
  result.mask_decision = mask_model.predict(history, original_response);
  templating::TokenMaskVector decisions =
      result.mask_decision.as_mask_vector(options.epsilon);
  result.tmpl = templating::build_inference_template(
      original_response, decisions, editing_persona, history, options.epsilon);
  auto generated =
      options.strict_copy
          ? recombiner::generate_strict(recombiner_model, history, result.tmpl,
                                        editing_persona, options.max_decode_length)
          : recombiner::generate(recombiner_model, history, result.tmpl, editing_persona,
                                 options.max_decode_length);
  result.edited_response = std::move(generated.words);
  result.truncated = generated.truncated;
  return result;
}

BatchEditOutcome batch_edit(const std::vector<corpus::EditCase>& cases,
                            const maskgen::MaskTagger& mask_model,
                            const model::SequenceModel& recombiner_model,
                            const EditorOptions& options) {
  BatchEditOutcome outcome;
  outcome.results.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    try {
      outcome.results.push_back(edit(c.history, c.original_response, c.editing_persona,
                                     mask_model, recombiner_model, options));
    } catch (const ConfigError&) {
      throw;  // a broken setup fails the whole batch
    } catch (const Error& e) {
      EditResult failed;
      failed.error = "case " + std::to_string(i) + ": " + e.what();
      outcome.results.push_back(std::move(failed));
      ++outcome.failure_count;
    }
  }
  return outcome;
}

}  // namespace gme::editor
