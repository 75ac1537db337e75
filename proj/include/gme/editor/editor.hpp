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

#ifndef GME_EDITOR_EDITOR_HPP_
#define GME_EDITOR_EDITOR_HPP_

#include <optional>
#include <string>
#include <vector>

#include "gme/corpus/types.hpp"
#include "gme/maskgen/maskgen.hpp"
#include "gme/model/sequence_model.hpp"
#include "gme/recombiner/recombiner.hpp"
#include "gme/templating/ops.hpp"

namespace gme::editor {

struct EditResult {
  Words edited_response;
  templating::Template tmpl;
  maskgen::MaskDecision mask_decision;
  bool truncated = false;
  std::optional<std::string> error;  // set when this case failed in a batch
};

struct EditorOptions {
  double epsilon = templating::kEpsilonMain;
  int max_decode_length = 64;
  bool strict_copy = false;  // constrained decoding that keeps literal segments
};

// Inference pipeline: predict mask confidences from (history, response),
// build the filtered span template, then greedily recombine with the editing
// persona. Both checkpoints must carry the same vocabulary hash.
EditResult edit(const std::vector<corpus::DialogueTurn>& history,
                const Words& original_response, const std::vector<Words>& editing_persona,
                const maskgen::MaskTagger& mask_model,
                const model::SequenceModel& recombiner_model, const EditorOptions& options);

struct BatchEditOutcome {
  std::vector<EditResult> results;  // aligned with the input cases
  std::size_t failure_count = 0;
};

// Per-case failures are recorded in the aligned result and the batch
// continues.
BatchEditOutcome batch_edit(const std::vector<corpus::EditCase>& cases,
                            const maskgen::MaskTagger& mask_model,
                            const model::SequenceModel& recombiner_model,
                            const EditorOptions& options);

}  // namespace gme::editor

#endif  // GME_EDITOR_EDITOR_HPP_
